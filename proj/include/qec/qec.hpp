// Copyright 2026 The qec Authors
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

#include "qec/baselines.hpp"
#include "qec/cluster.hpp"
#include "qec/corpus.hpp"
#include "qec/iskr.hpp"
#include "qec/metrics.hpp"
#include "qec/oracle.hpp"
#include "qec/pebc.hpp"
#include "qec/pipeline.hpp"
#include "qec/result_set.hpp"
#include "qec/synthetic.hpp"
