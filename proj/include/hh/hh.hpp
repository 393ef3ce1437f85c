// Copyright 2026 The precision-hh Authors
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

#pragma once

#include "hh/algorithm.hpp"
#include "hh/core.hpp"
#include "hh/eval.hpp"
#include "hh/hashparallel.hpp"
#include "hh/hashpipe.hpp"
#include "hh/precision.hpp"
#include "hh/rap.hpp"
#include "hh/space_saving.hpp"
#include "hh/theory.hpp"
#include "hh/traces.hpp"
#include "hh/way_table.hpp"
