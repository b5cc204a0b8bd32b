"""Closed label inventories shared by every stage of the pipeline."""

NIL = "Nil"

SIMPLE_CLASSES = (
    "Gene_expression",
    "Transcription",
    "Protein_catabolism",
    "Phosphorylation",
    "Localization",
    "Binding",
)
REGULATION_CLASSES = ("Regulation", "Positive_regulation", "Negative_regulation")
EVENT_CLASSES = SIMPLE_CLASSES + REGULATION_CLASSES

ROLES = ("Theme", "Cause")

# superclass used by the consistency features for event-valued arguments
EVENT_SUPERCLASS = "Event"

TRIGGER_LABELS = EVENT_CLASSES + (NIL,)
PARTICIPANT_LABELS = tuple(f"{role}:{cls}" for role in ROLES for cls in EVENT_CLASSES) + (NIL,)


def is_event_class(label):
    return label in EVENT_CLASSES


def is_regulation(label):
    return label in REGULATION_CLASSES


def participant_label(role, event_class):
    return f"{role}:{event_class}"


def split_participant_label(label):
    """``"Theme:Binding"`` -> ``("Theme", "Binding")``; Nil -> ``(None, None)``."""
    if label == NIL:
        return None, None
    role, _, cls = label.partition(":")
    return role, cls


def labels_for_trigger_class(event_class):
    """Participant labels that are consistent with a trigger of ``event_class``."""
    return tuple(participant_label(role, event_class) for role in ROLES) + (NIL,)
