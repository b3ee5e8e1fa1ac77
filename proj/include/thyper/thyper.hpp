/*
 *   Copyright 2026 The thyper Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/// Everything in one include.

#pragma once

#include "thyper/error.hpp"
#include "thyper/tensor.hpp"
#include "thyper/fourier.hpp"
#include "thyper/talg.hpp"
#include "thyper/rng.hpp"
#include "thyper/hypergraph.hpp"
#include "thyper/dataset.hpp"
#include "thyper/builder.hpp"
#include "thyper/denoise.hpp"
#include "thyper/nn.hpp"
#include "thyper/train.hpp"
#include "thyper/witness.hpp"
#include "thyper/bench.hpp"
