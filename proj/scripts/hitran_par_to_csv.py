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
"""Convert HITRAN 160-character .par records to the thz line-list CSV.

HITRAN stores wavenumbers in cm^-1, intensities in cm^-1/(molecule cm^-2)
and broadening/shift coefficients in cm^-1/atm. The library works in SI, so:

  fc0   [Hz]       = nu * c * 100
  S     [Hz m^2]   = S_hitran * c * 100 * 1e-4
  alpha [Hz @1atm] = gamma_hitran * c * 100
  delta [Hz @1atm] = delta_hitran * c * 100

Usage: hitran_par_to_csv.py lines.par [--fmin HZ] [--fmax HZ] > out.csv
"""
import argparse
import sys

C = 299792458.0
WAVENUMBER_TO_HZ = C * 100.0


def parse_record(rec):
    return {
        "gas": int(rec[0:2]),
        "isotope": int(rec[2:3], 36) if rec[2:3].strip() else 0,
        "nu": float(rec[3:15]),
        "S": float(rec[15:25]),
        "gamma_air": float(rec[35:40]),
        "gamma_self": float(rec[40:45]),
        "n_air": float(rec[55:59]),
        "delta_air": float(rec[59:67]),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("par")
    ap.add_argument("--fmin", type=float, default=0.0)
    ap.add_argument("--fmax", type=float, default=float("inf"))
    args = ap.parse_args()

    out = sys.stdout
    out.write("gas,isotope,fc0_hz,S,delta_hz,alpha_air_hz,alpha_gas_hz,gamma\n")
    with open(args.par) as fh:
        for lineno, rec in enumerate(fh, 1):
            if len(rec.rstrip("\n")) < 67:
                sys.exit("%s:%d: short record" % (args.par, lineno))
            r = parse_record(rec)
            f = r["nu"] * WAVENUMBER_TO_HZ
            if not (args.fmin <= f <= args.fmax):
                continue
            out.write("%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n" % (
                r["gas"], r["isotope"], f,
                r["S"] * WAVENUMBER_TO_HZ * 1e-4,
                r["delta_air"] * WAVENUMBER_TO_HZ,
                r["gamma_air"] * WAVENUMBER_TO_HZ,
                r["gamma_self"] * WAVENUMBER_TO_HZ,
                r["n_air"]))


if __name__ == "__main__":
    main()
