// Copyright 2026 The LDPRecover Authors
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

// Umbrella header: LDP frequency estimation (GRR, OUE, OLH), poisoning
// attack simulation, and frequency recovery from poisoned aggregates.

#ifndef LDPR_LDPRECOVER_HPP_
#define LDPR_LDPRECOVER_HPP_

#include "ldpr/attack.hpp"
#include "ldpr/config.hpp"
#include "ldpr/core.hpp"
#include "ldpr/eval.hpp"
#include "ldpr/ldp.hpp"
#include "ldpr/output.hpp"
#include "ldpr/recover.hpp"
#include "ldpr/rng.hpp"

#endif  // LDPR_LDPRECOVER_HPP_
