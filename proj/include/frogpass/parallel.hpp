// Copyright 2026 The frogpass Authors
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

// Fixed-size worker pool for replica fan-out. Work items are identified by
// index only, so results stored by index do not depend on scheduling.

#pragma once

#include <cstddef>
#include <functional>

namespace frogpass {

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 means 1). If any
/// call throws, the exception from the smallest failing index is rethrown
/// after all workers stop.
void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn);

}  // namespace frogpass
