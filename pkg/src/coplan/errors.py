class ConfigError(ValueError):
    """Scenario or fleet configuration that cannot be used as given."""


class PlanInfeasibleError(RuntimeError):
    """The constraints cannot host the workload.

    ``binding`` names the constraint class responsible: ``"energy_budgets"``,
    ``"payment_budget"`` or ``"privacy"``.
    """

    def __init__(self, binding, message=None):
        self.binding = binding
        super().__init__(message or f"constraints cannot host workload (binding: {binding})")
