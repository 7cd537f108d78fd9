"""Regenerate src/superreg/data/primitive_polys.txt.

    python scripts/gen_primitive_table.py
"""
from pathlib import Path

from superreg.finite_field import find_primitive_poly, format_modulus, poly_str

OUT = Path(__file__).resolve().parents[1] / "src" / "superreg" / "data" / "primitive_polys.txt"


def main():
    lines = [
        "# smallest primitive monic polynomial of degree N over F_p",
        "# p N coefficients (lowest degree first)",
    ]
    for p in (2, 3, 5):
        for N in range(1, 17):
            coeffs = find_primitive_poly(p, N)
            lines.append(f"{p} {N} {format_modulus(coeffs)}")
            print(p, N, poly_str(coeffs))
    OUT.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
