#!/usr/bin/env python3

""" Unit constants. Lengths are in Å, time in ps, energy in eV, mass in amu. """

# Copyright 2024 Cold Loop contributors
#
# This file is part of Cold Loop.
#
# Cold Loop is free software: you can redistribute it and/or modify it under
# the terms of the GNU General Public License as published by the Free Software
# Foundation, either version 3 of the License, or (at your option) any later
# version.
#
# Cold Loop is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR
# A PARTICULAR PURPOSE. See the GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along with
# Cold Loop. If not, see <https://www.gnu.org/licenses/>.

# amu * (Å/ps)^2 -> eV
MVV2E: float = 1.0364269e-4

# eV/Å / amu -> Å/ps^2
FTM2V: float = 1.0 / MVV2E

# Boltzmann constant, eV/K
BOLTZMANN: float = 8.617333262e-5

# Hartree * Bohr, eV*Å. Converts funcfl effective charges to r*phi.
HARTREE_BOHR: float = 27.2 * 0.529

# 1 Å/ps = 100 m/s
M_PER_S_PER_A_PER_PS: float = 100.0

COPPER_MASS: float = 63.546
COPPER_ATOMIC_NUMBER: int = 29
