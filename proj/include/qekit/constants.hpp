// Copyright (c) 2026 The qekit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QEKIT_CONSTANTS_HPP
#define QEKIT_CONSTANTS_HPP

namespace qekit::constants {

// CODATA 2018 exact values (SI redefinition).
inline constexpr double k_boltzmann_ev_per_k = 8.617333262e-5;
inline constexpr double planck_ev_s = 4.135667696e-15;
inline constexpr double hbar_ev_s = 6.582119569e-16;
inline constexpr double hbar_j_s = 1.054571817e-34;
inline constexpr double speed_of_light_m_per_s = 2.99792458e8;
inline constexpr double speed_of_light_nm_per_s = 2.99792458e17;
inline constexpr double elementary_charge_c = 1.602176634e-19;
inline constexpr double vacuum_permittivity_f_per_m = 8.8541878128e-12;

// hc in eV*nm: E [eV] = hc_ev_nm / lambda [nm].
inline constexpr double hc_ev_nm = planck_ev_s * speed_of_light_nm_per_s;

}  // namespace qekit::constants

#endif  // QEKIT_CONSTANTS_HPP
