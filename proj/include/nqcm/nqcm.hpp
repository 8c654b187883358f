// Copyright 2026 The NQCM Authors
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

// Umbrella header for the whole library.

#pragma once

#include "nqcm/config.hpp"
#include "nqcm/linalg.hpp"
#include "nqcm/machine.hpp"
#include "nqcm/optimizer.hpp"
#include "nqcm/report.hpp"
#include "nqcm/rng.hpp"
#include "nqcm/simulator.hpp"
#include "nqcm/states.hpp"
