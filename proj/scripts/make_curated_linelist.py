#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
#
# thz: terahertz ultra-massive MIMO link simulation library
# Copyright (C) 2026 The thz authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Generate data/h2o_o2_curated.csv, the bundled line list.

Line positions, strengths and widths come from the ITU-R P.676 water-vapour
and oxygen spectroscopic tables (lines at or above 100 GHz). Strengths are
rescaled so that the line-by-line absorption evaluator in include/thz/spectro.hpp
reproduces the tabulated peak attenuation at 296 K and 1 atm. Output is SI:
Hz for frequencies and widths (at 1 atm), Hz*m^2 per molecule for strengths.

Usage: make_curated_linelist.py > data/h2o_o2_curated.csv
"""
import math

R = 8.314462618
NA = 6.02214076e23
T_STP = 273.15
T_REF = 296.0
P_ATM_PA = 101325.0
P_ATM_HPA = 1013.25
DB_PER_NEPER = 10.0 / math.log(10.0)

# f0 [GHz], b1 [kHz/hPa], b3 [1e-4 GHz/hPa], b4, b5
H2O = [
    (119.995940, 0.0007, 29.48, 0.70, 4.780),
    (183.310087, 2.273, 29.06, 0.77, 5.022),
    (321.225630, 0.0470, 24.04, 0.67, 4.398),
    (325.152888, 1.514, 28.23, 0.64, 4.893),
    (336.227764, 0.0010, 26.93, 0.69, 4.740),
    (380.197353, 11.67, 28.11, 0.54, 5.063),
    (390.134508, 0.0045, 21.52, 0.63, 4.810),
    (437.346667, 0.0632, 18.45, 0.60, 4.230),
    (439.150807, 0.9098, 20.07, 0.63, 4.483),
    (443.018343, 0.1920, 15.55, 0.60, 5.083),
    (448.001085, 10.41, 25.64, 0.66, 5.028),
    (470.888999, 0.3254, 21.34, 0.66, 4.506),
    (474.689092, 1.260, 23.20, 0.65, 4.804),
    (488.490108, 0.2529, 25.86, 0.69, 5.201),
    (503.568532, 0.0372, 16.12, 0.61, 3.980),
    (504.482692, 0.0124, 16.12, 0.61, 4.010),
    (547.676440, 0.9785, 26.00, 0.70, 4.500),
    (552.020960, 0.1840, 26.00, 0.70, 4.500),
    (556.935985, 497.0, 30.86, 0.69, 4.552),
    (620.700807, 5.015, 24.38, 0.71, 4.856),
    (645.766085, 0.0067, 18.00, 0.60, 4.000),
    (658.005280, 0.2732, 32.10, 0.69, 4.140),
    (752.033113, 243.4, 30.86, 0.68, 4.352),
    (841.051732, 0.0134, 15.90, 0.33, 5.760),
    (859.965698, 0.1325, 30.60, 0.68, 4.090),
    (899.303175, 0.0547, 29.85, 0.68, 4.530),
    (902.611085, 0.0386, 28.65, 0.70, 5.100),
    (906.205957, 0.1836, 24.08, 0.70, 4.700),
    (916.171582, 8.400, 26.73, 0.70, 5.150),
    (923.112692, 0.0079, 29.00, 0.70, 5.000),
    (970.315022, 9.009, 25.50, 0.64, 4.940),
    (987.926764, 134.6, 29.85, 0.68, 4.550),
]

# f0 [GHz], a1 [kHz/hPa of dry air], a3 [1e-4 GHz/hPa]
O2 = [
    (118.750334, 945.0, 15.92),
    (368.498246, 67.9, 16.0),
    (424.763020, 638.0, 16.4),
    (487.249273, 235.0, 16.0),
    (715.392902, 99.6, 16.0),
    (773.839490, 671.0, 16.4),
    (834.145546, 180.0, 16.0),
]
O2_FRACTION = 0.20946


def number_density_per_unit_q():
    # (p/p0)(T_STP/T) p/(RT) N_A at 1 atm and T_REF
    return (T_STP / T_REF) * P_ATM_PA / (R * T_REF) * NA


def si_strength(f_ghz, strength_khz, molecule_fraction):
    # Peak of the Lorentzian evaluator is n*S/(pi*width); the tabulated peak
    # is 0.182 f S'/width dB/km with S' in kHz and width in GHz.
    n = number_density_per_unit_q() * molecule_fraction
    return math.pi * 0.1820e-3 * f_ghz * strength_khz * 1e9 / (DB_PER_NEPER * n)


def main():
    print("# Curated H2O and O2 lines, 100 GHz - 1 THz, SI units (Hz, Hz*m^2, Hz at 1 atm)")
    print("# gas ids follow HITRAN numbering: 1 = H2O, 7 = O2")
    print("gas,isotope,fc0_hz,S,delta_hz,alpha_air_hz,alpha_gas_hz,gamma")
    rows = []
    for f, b1, b3, b4, b5 in H2O:
        # S' = b1 * 0.1 * e with e = q * p; q cancels against n
        s = si_strength(f, b1 * 0.1 * P_ATM_HPA, 1.0)
        air = b3 * 1e-4 * P_ATM_HPA * 1e9
        rows.append((1, 1, f * 1e9, s, 0.0, air, air * b5, b4))
    for f, a1, a3 in O2:
        s = si_strength(f, a1 * 1e-7 * P_ATM_HPA, O2_FRACTION)
        air = a3 * 1e-4 * P_ATM_HPA * 1e9
        rows.append((7, 1, f * 1e9, s, 0.0, air, air, 0.8))
    rows.sort(key=lambda r: r[2])
    for r in rows:
        print("%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g" % r)


if __name__ == "__main__":
    main()
