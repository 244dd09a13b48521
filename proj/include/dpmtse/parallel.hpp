// Copyright 2026 The dpmtse authors
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

#ifndef DPMTSE_PARALLEL_HPP
#define DPMTSE_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace dpmtse {

/// Bounded worker pool with deterministic work assignment: worker w takes
/// indices w, w + W, w + 2W, ... The body must only write to slots owned
/// by its index.
inline void parallel_for(long n, const std::function<void(long)>& body,
                         int workers = 0) {
    if (workers <= 0)
        workers = std::clamp<int>(std::thread::hardware_concurrency(), 1, 4);
    workers = std::min<long>(workers, std::max<long>(n, 1));
    if (workers <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (long i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace dpmtse

#endif  // DPMTSE_PARALLEL_HPP
