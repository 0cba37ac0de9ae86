// Copyright 2026 The seqmcm Authors
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

// Umbrella header for the numerical library. The CLI layer lives in
// seqmcm/cli.hpp and pulls in the vendored CLI11.

#pragma once

#include "seqmcm/disturbance.hpp"
#include "seqmcm/errors.hpp"
#include "seqmcm/families.hpp"
#include "seqmcm/io.hpp"
#include "seqmcm/mcm.hpp"
#include "seqmcm/optim.hpp"
#include "seqmcm/qcore.hpp"
#include "seqmcm/random.hpp"
#include "seqmcm/seqchan.hpp"
#include "seqmcm/verify.hpp"
