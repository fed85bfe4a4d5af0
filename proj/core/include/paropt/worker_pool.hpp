#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace paropt {

/// Fixed-size pool of evaluation slots with a blocking batch-submit API.
///
/// A pool of size 1 runs every task inline on the submitting thread, which is
/// the sequential baseline. Larger pools own `size` worker threads; the
/// submitting thread only waits. Tasks are started in submission order.
///
/// A single pool may be shared by several sequential optimization runs, and
/// `run_batch` is safe to call from different threads, although each call
/// blocks its caller until its own batch has drained.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t size);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return size_; }

  /// Runs every task and returns once all of them have finished. If any task
  /// throws, the exception of the earliest such task in submission order is
  /// rethrown after the whole batch has drained.
  void run_batch(std::span<const std::function<void()>> tasks);

 private:
  void worker_loop();

  std::size_t size_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable work_ready_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
};

}  // namespace paropt
