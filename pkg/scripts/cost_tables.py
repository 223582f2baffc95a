#!/usr/bin/env python3
"""Print the annotation budget tables for the usual image-count ladder."""

from sesam.cost import annotation_hours, cost_performance_table, table_csv

LADDER = [100, 500, 1500, 2975]

print("hours per batch:")
print("n_images," + ",".join(["fine", "coarse", "scribble", "point"]))
for n in LADDER:
    row = [f"{annotation_hours(kind, n):.2f}" for kind in ("fine", "coarse", "scribble", "point")]
    print(f"{n}," + ",".join(row))

print()
print("cost vs performance (full training set, reported mIoU):")
print(
    table_csv(
        cost_performance_table(
            [
                ("point", 2975, 58.5),
                ("scribble", 2975, 71.5),
                ("coarse", 2975, 69.9),
                ("fine", 2975, 76.0),
            ]
        )
    )
)
