/* Copyright 2026 The previous-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header.

#ifndef PKIT_PKIT_HPP_
#define PKIT_PKIT_HPP_

#include "pkit/error.hpp"
#include "pkit/metrics.hpp"
#include "pkit/model.hpp"
#include "pkit/netdef.hpp"
#include "pkit/pipeline.hpp"
#include "pkit/predict.hpp"
#include "pkit/previousnet.hpp"
#include "pkit/profiling.hpp"
#include "pkit/simdevice.hpp"

#endif  // PKIT_PKIT_HPP_
