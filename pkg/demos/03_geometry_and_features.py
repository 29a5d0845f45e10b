#!/usr/bin/env python3
# Head-to-body box expansion, pair geometry, tensor pooling, derived pair attributes.

import numpy as np

from relscope import body_from_head, geom_feature, derive_pair_age, derive_pair_gender, pool_proximity
from relscope.annotations import BBox, Person, PersonPair

# body = 3x head width, 6x head height, centered on the head, top-aligned
head = BBox(100, 50, 30, 40)
body, clamped = body_from_head(head, 1000, 1000)
print(f"head {head}\nbody {body} (clamped={clamped})")

edge_body, edge_clamped = body_from_head(BBox(0, 0, 30, 40), 100, 100)
print(f"at the image edge the body is cut to {edge_body} (clamped={edge_clamped})")

pair = PersonPair("demo", "photo", Person("anna", BBox(100, 100, 40, 40)),
                  Person("ben", BBox(300, 110, 20, 20)), 640, 480)
feat = geom_feature(pair)
print(f"\npair geometry: distance {feat.distance_raw:.2f} head-diagonals ({feat.distance_class}),"
      f" size ratio {feat.ratio_raw:.1f} ({feat.ratio_class})")

# channel-max pooling squashes an interaction tensor to one map
tensor = np.array([[[1, 2], [3, 4]],
                   [[4, 3], [2, 1]]], dtype=float)
print(f"\npooled toy tensor: {pool_proximity(tensor, (2, 2, 2))}")

# age / gender class distributions become pair-level blocks with difference slots
senior = np.array([0, 0, 0, 0.1, 0.9, 0])   # infant child young middleAge senior unknown
child = np.array([0.05, 0.9, 0.05, 0, 0, 0])
vec = derive_pair_age(senior, child)
print(f"\nage block tail (small/middle/large gap): {vec[12:]}")

male = np.array([0.95, 0.05])
female = np.array([0.1, 0.9])
print(f"gender block tail (same/diff): {derive_pair_gender(male, female)[4:]}")
