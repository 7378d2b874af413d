// Copyright 2026 The DuetFair Authors
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

#ifndef DUETFAIR_DUETFAIR_HPP_
#define DUETFAIR_DUETFAIR_HPP_

#include "duetfair/io.hpp"
#include "duetfair/metrics.hpp"
#include "duetfair/model.hpp"
#include "duetfair/objectives.hpp"
#include "duetfair/rng.hpp"
#include "duetfair/robust.hpp"
#include "duetfair/synth.hpp"
#include "duetfair/trainer.hpp"
#include "duetfair/types.hpp"

#endif  // DUETFAIR_DUETFAIR_HPP_
