// Copyright 2026 The Bargain Arena Authors
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


#ifndef BARGAIN_BARGAIN_HPP_
#define BARGAIN_BARGAIN_HPP_

#include "bargain/agents.hpp"
#include "bargain/core.hpp"
#include "bargain/csv.hpp"
#include "bargain/engine.hpp"
#include "bargain/equilibrium.hpp"
#include "bargain/llm_client.hpp"
#include "bargain/metrics.hpp"
#include "bargain/parser.hpp"
#include "bargain/prompts.hpp"
#include "bargain/protocol.hpp"
#include "bargain/record.hpp"
#include "bargain/tournament.hpp"

#endif  // BARGAIN_BARGAIN_HPP_
