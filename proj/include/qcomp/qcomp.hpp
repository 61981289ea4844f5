// SPDX-License-Identifier: Apache-2.0
//
// qcomp - coordinated beamforming and power allocation for multicell
// networks with low-resolution ADCs/DACs
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef QCOMP_QCOMP_HPP
#define QCOMP_QCOMP_HPP

#include "qcomp/baseline.hpp"
#include "qcomp/common.hpp"
#include "qcomp/downlink.hpp"
#include "qcomp/harness.hpp"
#include "qcomp/quantizer.hpp"
#include "qcomp/rng.hpp"
#include "qcomp/scenario.hpp"
#include "qcomp/uplink.hpp"

#endif  // QCOMP_QCOMP_HPP
