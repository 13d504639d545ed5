#!/usr/bin/env python3
# Copyright 2026 The polyprop Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the 120-record extraction audit fixture.

Outputs audit_docs.txt (sample-delimited prose) and audit_gold.tsv (the
hand-checked annotation). Most records are routine; a fixed set reproduces
the error modes seen in manual review: ambiguous property aliases, values
given only through an equation, a lower bound written in words, and a unit
hidden inside a parenthetical.
"""

import argparse
import os
import random

SAMPLES = 40
PER_SAMPLE = 3

BASES = ["PLA", "PCL", "PET", "PMMA", "PS", "PP", "HDPE", "PA6", "PC", "PVDF"]
FILLERS = ["neat", "silica", "talc", "graphene", "glass fiber", "clay"]


# Routine records: (head, sentence template, value sampler, gold unit).
# Sentences end with a period; the value appears once, in the written unit.
def routine(rng):
    a = rng.randint(40, 180)
    choices = [
        ("tg", f"The glass transition temperature was {a} °C.", str(a), "°C"),
        ("tm", f"Tm of {a + 20}–{a + 30} °C was observed.",
         f"{a + 20}..{a + 30}", "°C"),
        ("tc", f"The crystallization temperature was {a} °C.", str(a), "°C"),
        ("tg", f"Tg = {a} ± 2 °C by DSC.", str(a), "°C"),
        ("td5", f"T5% reached {a + 200} °C.", str(a + 200), "°C"),
        ("tensile_strength", f"Tensile strength reached {a / 2:g} MPa.",
         f"{a / 2:g}", "MPa"),
        ("youngs_modulus", f"Young's modulus was {a / 40:g} GPa.",
         f"{a / 40:g}", "GPa"),
        ("elongation_at_break", f"Elongation at break was {a} %.", str(a), "%"),
        ("flexural_strength", f"Flexural strength was {a} MPa.", str(a), "MPa"),
        ("compressive_strength", f"Compressive strength of {a} MPa was found.",
         str(a), "MPa"),
        ("impact_strength", f"Izod impact strength of {a / 20:g} kJ/m² was measured.",
         f"{a / 20:g}", "kJ/m²"),
        ("yield_strength", f"Yield strength was {a / 3:.1f} MPa.",
         f"{a / 3:.1f}", "MPa"),
        ("flexural_modulus", f"The flexural modulus was {a / 50:g} GPa.",
         f"{a / 50:g}", "GPa"),
        ("dielectric_constant", f"The dielectric constant was {a / 40:g}.",
         f"{a / 40:g}", "-"),
        ("thermal_conductivity",
         f"Thermal conductivity of {a / 400:g} W/(m·K) was measured.",
         f"{a / 400:g}", "W/(m·K)"),
        ("electrical_conductivity",
         f"Electrical conductivity reached {a % 9 + 1}.5 × 10^-{a % 5 + 3} S/cm.",
         f"{a % 9 + 1}.5e-{a % 5 + 3}", "S/cm"),
        ("density", f"Density was {1 + a / 1000:g} g/cm³.", f"{1 + a / 1000:g}",
         "g/cm³"),
        ("mw", f"Mw reached {a % 9 + 1}.2 × 10^5 g/mol.", f"{a % 9 + 1}.2e5",
         "g/mol"),
        ("mn", f"Mn was {a} kg/mol by GPC.", str(a), "kg/mol"),
        ("dispersity", f"The dispersity was {1 + a / 100:g}.", f"{1 + a / 100:g}",
         "-"),
        ("crystallinity", f"The degree of crystallinity was {a / 4:g} %.",
         f"{a / 4:g}", "%"),
        ("viscosity", f"Zero-shear viscosity of {a * 10} Pa·s was recorded.",
         str(a * 10), "Pa·s"),
        ("td_onset", f"Onset degradation temperature was {a + 180} °C.",
         str(a + 180), "°C"),
        ("tg", f"Tg ≥ {a} °C for all films.", f">{a}", "°C"),
    ]
    return rng.choice(choices)


# Extractor maps the bare alias to a sibling head.
def property_error(rng, k):
    a = rng.randint(20, 90)
    cases = [
        ("flexural_modulus", f"The bending test gave a modulus of {a / 20:g} GPa.",
         f"{a / 20:g}", "GPa", "modulus from a bending test"),
        ("flexural_strength", f"In the bending test the strength reached {a} MPa.",
         str(a), "MPa", "strength from a bending test"),
        ("td5", f"Td at five percent loss was {a + 260} °C.", str(a + 260), "°C",
         "Td quoted at 5% loss"),
        ("thermal_conductivity", f"The conductivity was {a / 200:g} W/(m·K).",
         f"{a / 200:g}", "W/(m·K)", "thermal conductivity by unit"),
    ]
    return cases[k % len(cases)]


def equation_error(rng):
    a = rng.randint(100, 900)
    return ("viscosity",
            f"The melt viscosity follows η = {a}·exp(−0.02T) Pa·s over the range.",
            "-", "Pa·s", "temperature-dependent law, no single value")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__),
                                                  "..", "tests", "fixtures"))
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    n = SAMPLES * PER_SAMPLE
    slots = list(range(n))
    rng.shuffle(slots)
    kinds = {}
    for i in slots[:11]:
        kinds[i] = "property"
    for i in slots[11:17]:
        kinds[i] = "equation"
    kinds[slots[17]] = "bound"
    kinds[slots[18]] = "paren_unit"

    docs, gold = [], ["record_id\tsample_id\thead\tvalue\tunit\tnote"]
    prop_k = 0
    for s in range(SAMPLES):
        sid = f"A{s + 1:03d}"
        base, filler = rng.choice(BASES), rng.choice(FILLERS)
        docs.append(f"== SAMPLE {sid} ==")
        docs.append(f"Sample: {base} with {rng.choice([5, 10, 20])} wt% {filler}")
        docs.append(f"Synthesis: melt mixed at {rng.choice([180, 200, 220])} °C "
                    f"for {rng.choice([5, 10])} min, then compression molded")
        for r in range(PER_SAMPLE):
            i = s * PER_SAMPLE + r
            kind = kinds.get(i, "routine")
            note = ""
            if kind == "routine":
                head, text, value, unit = routine(rng)
            elif kind == "property":
                head, text, value, unit, note = property_error(rng, prop_k)
                prop_k += 1
            elif kind == "equation":
                head, text, value, unit, note = equation_error(rng)
            elif kind == "bound":
                a = rng.randint(150, 250)
                head, text, value, unit = ("tensile_strength",
                                           f"Tensile strength was in excess of {a} MPa.",
                                           f">{a}", "MPa")
                note = "lower bound stated in words"
            else:
                a = rng.randint(20, 90)
                head, text, value, unit = ("mn", f"Mn was {a} (kg/mol, GPC).",
                                           str(a), "kg/mol")
                note = "unit inside parenthetical"
            docs.append(text)
            gold.append(f"{sid}#{r + 1}\t{sid}\t{head}\t{value}\t{unit}\t{note}")
        docs.append("== END SAMPLE ==")
        docs.append("")

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "audit_docs.txt"), "w", encoding="utf-8") as f:
        f.write("\n".join(docs))
    with open(os.path.join(args.out, "audit_gold.tsv"), "w", encoding="utf-8") as f:
        f.write("\n".join(gold) + "\n")


if __name__ == "__main__":
    main()
