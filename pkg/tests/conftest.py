import random

import pytest

from kieval.model import NONGROUP, DocumentExtraction, EntityGroup, ExtractedEntity

ALPHABET = "ABCD"
GROUP_TYPES = {"menu": ("menu.nm", "menu.cnt", "menu.price"), "sub": ("sub.nm", "sub.price")}
NONGROUP_TYPES = ("store.name", "total.price")

_acceptance_lines: list[str] = []


@pytest.fixture
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def ent(etype, value, conf=None):
    return ExtractedEntity(etype, value, conf)


def group(gtype, *pairs):
    return EntityGroup(gtype, tuple(ent(t, v) for t, v in pairs))


def doc(doc_id, nongroup=(), *groups):
    return DocumentExtraction(doc_id, (group(NONGROUP, *nongroup), *groups))


def random_group(rng, etypes, max_entities=6, confidences=False):
    n = rng.randint(1, max_entities)
    return tuple(
        ExtractedEntity(rng.choice(etypes), rng.choice(ALPHABET), round(rng.random(), 2) if confidences else None)
        for _ in range(n)
    )


def random_document(rng, doc_id="d", max_groups=5, max_entities=6, grouped=True, confidences=False):
    """Random document with at most ``max_groups`` groups per group type."""
    ungrouped = ()
    if rng.random() < 0.8:
        ungrouped = random_group(rng, NONGROUP_TYPES, max_entities, confidences)
    groups = [EntityGroup(NONGROUP, ungrouped)]
    if grouped:
        for gtype, etypes in GROUP_TYPES.items():
            for _ in range(rng.randint(0, max_groups)):
                groups.append(EntityGroup(gtype, random_group(rng, etypes, max_entities, confidences)))
        tail = groups[1:]
        rng.shuffle(tail)
        groups[1:] = tail
    return DocumentExtraction(doc_id, tuple(groups))


def perturb(rng, document, confidences=False):
    """A prediction derived from ``document``: dropped, replaced, moved and extra entities."""
    groups = []
    for g in document.groups:
        ents = []
        for e in g.entities:
            r = rng.random()
            conf = round(rng.random(), 2) if confidences else None
            if r < 0.15:
                continue
            if r < 0.3:
                ents.append(ExtractedEntity(e.entity_type, rng.choice(ALPHABET), conf))
            else:
                ents.append(ExtractedEntity(e.entity_type, e.value, conf))
        if len(ents) < 6 and rng.random() < 0.2:
            etypes = GROUP_TYPES.get(g.group_type, NONGROUP_TYPES)
            ents.append(ExtractedEntity(rng.choice(etypes), rng.choice(ALPHABET), round(rng.random(), 2) if confidences else None))
        if ents or g.is_nongroup:
            groups.append(EntityGroup(g.group_type, tuple(ents)))
    # move one entity between two groups of the same type
    same = [i for i, g in enumerate(groups) if not g.is_nongroup and len(g) > 1]
    if len(same) >= 2 and rng.random() < 0.5:
        a, b = rng.sample(same, 2)
        if groups[a].group_type == groups[b].group_type and len(groups[b]) < 6:
            moved = groups[a].entities[-1]
            groups[a] = EntityGroup(groups[a].group_type, groups[a].entities[:-1])
            groups[b] = EntityGroup(groups[b].group_type, groups[b].entities + (moved,))
    tail = groups[1:]
    rng.shuffle(tail)
    return DocumentExtraction(document.doc_id, (groups[0], *tail))


def random_instance(seed, grouped=True, confidences=False):
    """A (gt, pred) pair; half related by perturbation, half independent."""
    rng = random.Random(seed)
    gt = random_document(rng, f"doc-{seed}", grouped=grouped)
    if rng.random() < 0.5:
        pred = perturb(rng, gt, confidences)
    else:
        pred = random_document(rng, f"doc-{seed}", grouped=grouped, confidences=confidences)
    return gt, pred
