#!/usr/bin/env python3
# Walk through the built-in label hierarchy: 5 domains partitioning 16 relations.

from relscope import default_taxonomy

tax = default_taxonomy()

print(f"{tax.n_domains} domains, {tax.n_relations} relations\n")
for d in range(tax.n_domains):
    rels = [tax.relation_name(r) for r in tax.relations_of(d)]
    print(f"{tax.domain_name(d):<20} {', '.join(rels)}")

print("\nname parsing is forgiving about case, whitespace, and known variants:")
for raw in ["Mother-Child ", "lovers", "band_members", "GRANDMOTHER-GRANDCHILD"]:
    idx = tax.parse_relation(raw)
    print(f"  {raw!r:<28} -> {tax.relation_name(idx)!r} (domain {tax.domain_name(tax.domain_of(idx))})")

print("\nunknown names are rejected with suggestions:")
try:
    tax.parse_relation("freinds")
except Exception as exc:
    print(f"  {exc}")

# the hierarchy can be exported and reloaded as a JSON manifest
manifest = tax.to_manifest()
print(f"\nmanifest: {len(manifest['domains'])} domain entries, e.g. {manifest['domains'][2]}")
