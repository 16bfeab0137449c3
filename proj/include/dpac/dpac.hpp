// Copyright 2026 The DPAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPAC_DPAC_HPP
#define DPAC_DPAC_HPP

#include "dpac/common.hpp"
#include "dpac/consensus.hpp"
#include "dpac/dishuf.hpp"
#include "dpac/experiments.hpp"
#include "dpac/graph.hpp"
#include "dpac/paillier.hpp"
#include "dpac/privacy.hpp"
#include "dpac/rng.hpp"
#include "dpac/serialize.hpp"
#include "dpac/simnet.hpp"

#endif  // DPAC_DPAC_HPP
