"""Hierarchical label space: five social domains partitioning sixteen relations.

The default taxonomy ships as compiled-in data and can be replaced through a
JSON manifest (``{"domains": [{"name": ..., "relations": [...]}]}``) so other
label hierarchies can run through the same pipeline. Relation and domain
identifiers are plain integer indices; names are canonical lowercase strings.
"""

from __future__ import annotations

import difflib
import json
import re
from pathlib import Path

from .errors import InputError, UnknownRelationError

# Domain order is fixed; relation indices run through the domains in this order.
DEFAULT_DOMAINS = (
    ("Attachment", ("father-child", "mother-child", "grandpa-grandchild", "grandma-grandchild")),
    ("Reciprocity", ("friends", "siblings", "classmates")),
    ("Mating", ("lovers/spouses",)),
    ("Hierarchical power", ("presenter-audience", "teacher-student", "trainer-trainee", "leader-subordinate")),
    ("Coalitional groups", ("band members", "dance team members", "sport team members", "colleagues")),
)

# Documented alias table: spelling variants seen in annotation exports.
# Unlisted shorthand ("boss", "couple", ...) is rejected on purpose.
RELATION_ALIASES = {
    "grandmother-grandchild": "grandma-grandchild",
    "grandfather-grandchild": "grandpa-grandchild",
    "lovers": "lovers/spouses",
    "spouses": "lovers/spouses",
    "lovers-spouses": "lovers/spouses",
    "band member": "band members",
    "dance team member": "dance team members",
    "sport team member": "sport team members",
    "sports team members": "sport team members",
    "friend": "friends",
    "sibling": "siblings",
    "classmate": "classmates",
    "colleague": "colleagues",
}

_WS = re.compile(r"\s+")


def _normalize(name: str) -> str:
    return _WS.sub(" ", name.strip().lower())


def _match_keys(name: str):
    """Normalized lookup keys tried in order: as-is, then separator variants."""
    norm = _normalize(name)
    keys = [norm, norm.replace("_", " "), norm.replace("_", "-"),
            norm.replace("-", " "), norm.replace(" ", "-")]
    seen, out = set(), []
    for k in keys:
        if k not in seen:
            seen.add(k)
            out.append(k)
    return out


class Taxonomy:
    """Immutable domain -> relation partition with name parsing.

    Construction validates that relations are unique and every relation
    belongs to exactly one domain, so ``domain_of`` is total and the
    per-domain relation lists form a true partition.
    """

    def __init__(self, domains):
        domains = tuple((str(d), tuple(str(r) for r in rels)) for d, rels in domains)
        if not domains:
            raise InputError("taxonomy needs at least one domain")
        names = [d for d, _ in domains]
        if len(set(names)) != len(names):
            raise InputError("duplicate domain names in taxonomy")
        self.domains: tuple[str, ...] = tuple(names)
        rels: list[str] = []
        owner: list[int] = []
        for d_idx, (_, d_rels) in enumerate(domains):
            if not d_rels:
                raise InputError(f"domain {names[d_idx]!r} has no relations")
            for r in d_rels:
                rels.append(r)
                owner.append(d_idx)
        if len(set(rels)) != len(rels):
            raise InputError("duplicate relation names in taxonomy")
        self.relations: tuple[str, ...] = tuple(rels)
        self.relation_domain: tuple[int, ...] = tuple(owner)
        self._by_domain: tuple[tuple[int, ...], ...] = tuple(
            tuple(i for i, o in enumerate(owner) if o == d) for d in range(len(names))
        )
        lookup = {_normalize(r): i for i, r in enumerate(rels)}
        for alias, target in RELATION_ALIASES.items():
            key = _normalize(alias)
            if key not in lookup and _normalize(target) in lookup:
                lookup[key] = lookup[_normalize(target)]
        self._lookup = lookup
        self._domain_lookup = {_normalize(d): i for i, d in enumerate(names)}

    # -- identities ---------------------------------------------------------

    @property
    def n_domains(self) -> int:
        return len(self.domains)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    def relation_name(self, r: int) -> str:
        return self.relations[r]

    def domain_name(self, d: int) -> str:
        return self.domains[d]

    # -- operations ---------------------------------------------------------

    def domain_of(self, r: int) -> int:
        """Index of the unique domain owning relation ``r``."""
        return self.relation_domain[r]

    def relations_of(self, d: int) -> tuple[int, ...]:
        """Relation indices of domain ``d`` in taxonomy order."""
        return self._by_domain[d]

    def parse_relation(self, name: str) -> int:
        """Case-insensitive, whitespace-tolerant relation lookup.

        Falls back on the alias table and separator variants; anything else
        raises UnknownRelationError listing the nearest canonical names.
        """
        for key in _match_keys(name):
            if key in self._lookup:
                return self._lookup[key]
        near = difflib.get_close_matches(_normalize(name), self.relations, n=3, cutoff=0.5)
        raise UnknownRelationError(name, near)

    def parse_domain(self, name: str) -> int:
        key = _normalize(name)
        if key not in self._domain_lookup:
            near = difflib.get_close_matches(key, [_normalize(d) for d in self.domains], n=3, cutoff=0.4)
            raise InputError(f"unknown domain name {name!r} (closest: {', '.join(near)})")
        return self._domain_lookup[key]

    # -- manifest I/O -------------------------------------------------------

    def to_manifest(self) -> dict:
        return {
            "domains": [
                {"name": d, "relations": [self.relations[i] for i in self.relations_of(di)]}
                for di, d in enumerate(self.domains)
            ]
        }

    @classmethod
    def from_manifest(cls, manifest: dict) -> "Taxonomy":
        try:
            domains = [(entry["name"], tuple(entry["relations"])) for entry in manifest["domains"]]
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad taxonomy manifest: {exc}") from exc
        return cls(domains)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_manifest(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Taxonomy":
        return cls.from_manifest(json.loads(Path(path).read_text(encoding="utf-8")))

    def __eq__(self, other):
        return isinstance(other, Taxonomy) and self.to_manifest() == other.to_manifest()

    def __repr__(self):
        return f"Taxonomy({self.n_domains} domains, {self.n_relations} relations)"


_DEFAULT = None


def default_taxonomy() -> Taxonomy:
    """The built-in 5-domain, 16-relation hierarchy."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Taxonomy(DEFAULT_DOMAINS)
    return _DEFAULT
