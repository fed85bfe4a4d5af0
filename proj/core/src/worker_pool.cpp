#include "paropt/worker_pool.hpp"

#include <exception>
#include <latch>

#include "paropt/types.hpp"

namespace paropt {

WorkerPool::WorkerPool(std::size_t size) : size_(size) {
  if (size == 0) throw ConfigError("worker pool needs at least one worker");
  if (size_ == 1) return;
  threads_.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    threads_.emplace_back([this] { worker_loop(); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  work_ready_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::worker_loop() {
  for (;;) {
    std::function<void()> job;
    {
      std::unique_lock lock(mutex_);
      work_ready_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    job();
  }
}

void WorkerPool::run_batch(std::span<const std::function<void()>> tasks) {
  std::vector<std::exception_ptr> errors(tasks.size());

  if (threads_.empty()) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::latch done(static_cast<std::ptrdiff_t>(tasks.size()));
    {
      std::lock_guard lock(mutex_);
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        queue_.emplace_back([&tasks, &errors, &done, i] {
          try {
            tasks[i]();
          } catch (...) {
            errors[i] = std::current_exception();
          }
          done.count_down();
        });
      }
    }
    if (tasks.size() == 1) {
      work_ready_.notify_one();
    } else {
      work_ready_.notify_all();
    }
    done.wait();
  }

  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace paropt
