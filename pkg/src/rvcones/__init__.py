"""Regular variation on cones: measures, samplers, estimators and extreme value limits."""

__version__ = "0.1.0"
