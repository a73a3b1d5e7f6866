from .rules import Rule, RuleSet, StaticRuleEngine, static_decide
from .classifier import ClassifierModel, SupervisedEngine, supervised_decide, train_classifier

__all__ = [
    "Rule",
    "RuleSet",
    "StaticRuleEngine",
    "static_decide",
    "ClassifierModel",
    "SupervisedEngine",
    "supervised_decide",
    "train_classifier",
]
