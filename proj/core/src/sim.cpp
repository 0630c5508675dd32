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

#include "dlist/sim.hpp"

#include <cassert>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace dlist {

namespace {
thread_local Sim* g_current_sim = nullptr;
thread_local Fiber* g_current_fiber = nullptr;
thread_local Fiber* g_starting_fiber = nullptr;
}  // namespace

void Fiber::trampoline() {
  Fiber* self = g_starting_fiber;
  g_starting_fiber = nullptr;
  try {
    self->fn_();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fiber '%s' threw: %s\n", self->name_.c_str(),
                 e.what());
    std::abort();
  }
  self->sim_->fiber_done(self);
}

Sim::Sim(uint64_t seed) : rng_(seed) {}

Sim::~Sim() = default;

Sim* Sim::current() { return g_current_fiber ? g_current_sim : nullptr; }
Fiber* Sim::current_fiber() { return g_current_fiber; }

size_t Sim::live_fibers() const {
  return fibers_.size() - free_slots_.size();
}

void Sim::make_runnable(Fiber* f) {
  if (f->run_pos_ >= 0) return;
  f->state_ = Fiber::State::Runnable;
  f->run_pos_ = int(runnable_.size());
  runnable_.push_back(f);
}

void Sim::remove_runnable(Fiber* f) {
  if (f->run_pos_ < 0) return;
  int pos = f->run_pos_;
  Fiber* last = runnable_.back();
  runnable_[pos] = last;
  last->run_pos_ = pos;
  runnable_.pop_back();
  f->run_pos_ = -1;
}

Fiber* Sim::spawn(std::string name, std::function<void()> fn,
                  size_t stack_size) {
  uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot = uint32_t(fibers_.size());
    fibers_.push_back(std::make_unique<Fiber>());
  }
  Fiber* f = fibers_[slot].get();
  f->sim_ = this;
  f->slot_ = slot;
  f->name_ = std::move(name);
  f->fn_ = std::move(fn);
  if (f->stack_.size() < stack_size) f->stack_.resize(stack_size);
  f->state_ = Fiber::State::Runnable;
  f->started_ = false;
  f->wake_tick_ = -1;
  f->wait_key_ = 0;
  f->wait_deadline_ = -1;
  f->timed_out_ = false;
  f->run_pos_ = -1;
  make_runnable(f);
  return f;
}

void Sim::switch_to(Fiber* f) {
  Fiber* prev_fiber = g_current_fiber;
  Sim* prev_sim = g_current_sim;
  g_current_sim = this;
  g_current_fiber = f;
  running_ = f;
  if (!f->started_) {
    f->started_ = true;
    getcontext(&f->ctx_);
    f->ctx_.uc_stack.ss_sp = f->stack_.data();
    f->ctx_.uc_stack.ss_size = f->stack_.size();
    f->ctx_.uc_link = &sched_ctx_;
    g_starting_fiber = f;
    makecontext(&f->ctx_, &Fiber::trampoline, 0);
  }
  swapcontext(&sched_ctx_, &f->ctx_);
  running_ = nullptr;
  g_current_fiber = prev_fiber;
  g_current_sim = prev_sim;
}

void Sim::fiber_done(Fiber* f) {
  f->state_ = Fiber::State::Done;
  remove_runnable(f);
  free_slots_.push_back(f->slot_);
  f->fn_ = nullptr;
  swapcontext(&f->ctx_, &sched_ctx_);
  std::abort();  // a done fiber is never resumed
}

void Sim::yield() {
  Fiber* f = g_current_fiber;
  assert(f != nullptr && f->sim_ == this);
  swapcontext(&f->ctx_, &sched_ctx_);
}

void Sim::wait_until(Tick t) {
  Fiber* f = g_current_fiber;
  assert(f != nullptr && f->sim_ == this);
  if (t <= now_) t = now_ + 1;
  f->state_ = Fiber::State::Blocked;
  f->wake_tick_ = t;
  remove_runnable(f);
  swapcontext(&f->ctx_, &sched_ctx_);
}

bool Sim::wait_event(uint64_t key, Tick deadline) {
  Fiber* f = g_current_fiber;
  assert(f != nullptr && f->sim_ == this);
  assert(key != 0);
  f->state_ = Fiber::State::Blocked;
  f->wait_key_ = key;
  f->wait_deadline_ = deadline;
  f->timed_out_ = false;
  remove_runnable(f);
  waiters_.emplace(key, f->slot_);
  swapcontext(&f->ctx_, &sched_ctx_);
  return !f->timed_out_;
}

void Sim::notify_event(uint64_t key) {
  auto [lo, hi] = waiters_.equal_range(key);
  for (auto it = lo; it != hi; ++it) {
    Fiber* f = fibers_[it->second].get();
    if (f->state_ == Fiber::State::Blocked && f->wait_key_ == key) {
      f->wait_key_ = 0;
      f->wake_tick_ = -1;
      f->wait_deadline_ = -1;
      make_runnable(f);
    }
  }
  waiters_.erase(lo, hi);
}

void Sim::set_external(std::function<size_t()> ready_count,
                       std::function<void(size_t)> deliver,
                       std::function<Tick()> next_due) {
  ext_ready_ = std::move(ready_count);
  ext_deliver_ = std::move(deliver);
  ext_next_due_ = std::move(next_due);
}

size_t Sim::pick(size_t n_choices) {
  assert(n_choices > 0);
  if (policy_.record) policy_.arity.push_back(uint32_t(n_choices));
  if (policy_.cursor < policy_.forced.size()) {
    uint32_t c = policy_.forced[policy_.cursor++];
    return c < n_choices ? c : n_choices - 1;
  }
  if (n_choices == 1) return 0;
  return size_t(rng_.below(n_choices));
}

uint64_t Sim::run(uint64_t max_steps) {
  uint64_t start_steps = steps_;
  for (;;) {
    if (max_steps != 0 && steps_ - start_steps >= max_steps) {
      exhausted_ = true;
      break;
    }
    size_t n_ext = ext_ready_ ? ext_ready_() : 0;
    size_t total = runnable_.size() + n_ext;
    if (total > 0) {
      ++steps_;
      ++seq_;
      size_t c = pick(total);
      if (c < runnable_.size()) {
        switch_to(runnable_[c]);
      } else {
        ext_deliver_(c - runnable_.size());
      }
      continue;
    }

    // Nothing runnable: advance the clock to the next timer or message.
    Tick next = std::numeric_limits<Tick>::max();
    bool any = false;
    for (auto& f : fibers_) {
      if (f->state_ != Fiber::State::Blocked) continue;
      if (f->wake_tick_ >= 0 && f->wake_tick_ < next) {
        next = f->wake_tick_;
        any = true;
      }
      if (f->wait_deadline_ >= 0 && f->wait_deadline_ < next) {
        next = f->wait_deadline_;
        any = true;
      }
    }
    if (ext_next_due_) {
      Tick d = ext_next_due_();
      if (d >= 0 && d < next) {
        next = d;
        any = true;
      }
    }
    if (!any) break;
    assert(next > now_);
    now_ = next;
    for (auto& f : fibers_) {
      if (f->state_ != Fiber::State::Blocked) continue;
      if (f->wake_tick_ >= 0 && f->wake_tick_ <= now_) {
        f->wake_tick_ = -1;
        make_runnable(f.get());
      } else if (f->wait_deadline_ >= 0 && f->wait_deadline_ <= now_) {
        // Timed-out event wait.
        auto [lo, hi] = waiters_.equal_range(f->wait_key_);
        for (auto it = lo; it != hi; ++it) {
          if (it->second == f->slot_) {
            waiters_.erase(it);
            break;
          }
        }
        f->wait_key_ = 0;
        f->wait_deadline_ = -1;
        f->timed_out_ = true;
        make_runnable(f.get());
      }
    }
  }

  stuck_on_event_ = false;
  for (auto& f : fibers_) {
    if (f->state_ == Fiber::State::Blocked && f->wait_key_ != 0 &&
        f->wait_deadline_ < 0) {
      stuck_on_event_ = true;
    }
  }
  return steps_ - start_steps;
}

}  // namespace dlist
