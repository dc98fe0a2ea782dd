"""Manifest parsing: which images belong to which entity."""

from collections import OrderedDict


class ManifestError(Exception):
    pass


def read_manifest(path):
    """Parse ``entity<TAB>image_path`` rows into an entity -> paths map.

    Entities keep their rows in file order; entities with no rows simply
    do not appear (the engine fills them at load time).
    """
    images = OrderedDict()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            fields = stripped.split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise ManifestError(
                    f"{path}:{line_no}: expected 'entity<TAB>image_path'"
                )
            images.setdefault(fields[0], []).append(fields[1])
    return images


def read_entity_names(path):
    """Entity names from an engine sidecar vocabulary (``name<TAB>id``)."""
    names = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.rstrip("\n")
            if stripped:
                names.add(stripped.split("\t")[0])
    return names


def check_against_vocabulary(images, names):
    unknown = sorted(set(images) - names)
    if unknown:
        shown = ", ".join(unknown[:5])
        more = "" if len(unknown) <= 5 else f" (+{len(unknown) - 5} more)"
        raise ManifestError(f"manifest entities missing from vocabulary: {shown}{more}")
