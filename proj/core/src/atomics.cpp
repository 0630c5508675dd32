/*
 * Copyright 2026 the dlist authors
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

#include "dlist/atomics.hpp"

#include <cstdio>
#include <cstdlib>

namespace dlist {

RdcssDomain::RdcssDomain(size_t capacity) : pool_(capacity) {}

bool RdcssDomain::rdcss(AtomicWord* control, uint64_t expected_control,
                        AtomicWord* data, uint64_t expected_data,
                        uint64_t new_data) {
  assert(!is_descriptor_word(expected_data));
  assert(!is_descriptor_word(new_data));
  assert(control != data);

  size_t id = next_.fetch_add(1, std::memory_order_relaxed);
  if (id >= pool_.size()) {
    std::fprintf(stderr, "rdcss descriptor pool exhausted (%zu)\n",
                 pool_.size());
    std::abort();
  }
  RdcssDescriptor& d = pool_[id];
  d.control = control;
  d.expected_control = expected_control;
  d.data = data;
  d.expected_data = expected_data;
  d.new_data = new_data;
  d.outcome.init(RdcssDescriptor::kUndecided);
  uint64_t tag = (uint64_t(id) << 1) | 1u;

  for (;;) {
    if (data->cas(expected_data, tag)) break;
    uint64_t w = data->load();
    if (is_descriptor_word(w)) {
      help(w);
      continue;
    }
    if (w != expected_data) return false;
    // Lost a race against another writer that restored the same value;
    // retry the install.
  }
  help(tag);
  return d.outcome.load() == RdcssDescriptor::kSucceeded;
}

void RdcssDomain::help(uint64_t tagged_word) {
  size_t id = size_t(tagged_word >> 1);
  assert(id < next_.load(std::memory_order_relaxed));
  RdcssDescriptor& d = pool_[id];
  uint64_t c = d.control->load();
  uint64_t want = (c == d.expected_control) ? RdcssDescriptor::kSucceeded
                                            : RdcssDescriptor::kFailed;
  d.outcome.cas(RdcssDescriptor::kUndecided, want);
  uint64_t final = d.outcome.load();
  uint64_t out = (final == RdcssDescriptor::kSucceeded) ? d.new_data
                                                        : d.expected_data;
  d.data->cas(tagged_word, out);
}

uint64_t RdcssDomain::read(AtomicWord* cell) {
  for (;;) {
    uint64_t w = cell->load();
    if (!is_descriptor_word(w)) return w;
    help(w);
  }
}

}  // namespace dlist
