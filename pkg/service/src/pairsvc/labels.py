"""The four relation classes, in the fixed order used everywhere.

The order is part of the model artifact contract: logits, confidences and
checkpoint metadata all index into this list, so it must never be
rearranged for a given artifact version.
"""

CLASSES = ["same_row", "same_column", "same_cell", "none"]

CLASS_TO_INDEX = {name: i for i, name in enumerate(CLASSES)}
