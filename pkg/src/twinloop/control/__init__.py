from .translate import ManagementAction, TranslationTable, translate_policy
from .dispatch import ActionLogEntry, Dispatcher
from .feedback import FeedbackRecord, OutcomeCollector

__all__ = [
    "ManagementAction",
    "TranslationTable",
    "translate_policy",
    "ActionLogEntry",
    "Dispatcher",
    "FeedbackRecord",
    "OutcomeCollector",
]
