// Copyright (c) 2026 The bofscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include "bofscan/core.hpp"
#include "bofscan/imaging.hpp"
#include "bofscan/synth.hpp"
#include "bofscan/registration.hpp"
#include "bofscan/features.hpp"
#include "bofscan/vocabulary.hpp"
#include "bofscan/mlp.hpp"
#include "bofscan/pca.hpp"
#include "bofscan/baselines.hpp"
#include "bofscan/evaluation.hpp"
#include "bofscan/report.hpp"
#include "bofscan/serialization.hpp"
#include "bofscan/pipeline.hpp"
