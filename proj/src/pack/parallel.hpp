#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pack {

// Fixed pool of workers executing static range partitions of [0, count).
//
// run() splits the index range into size() contiguous blocks, one per worker,
// and blocks until all are done. Callers must write only to per-index slots,
// so results are independent of scheduling; combined with per-chain RNG
// streams this keeps runs bit-deterministic for any worker count.
class WorkerPool {
  public:
    explicit WorkerPool(int workers) {
        if (workers <= 0) {
            workers = static_cast<int>(std::thread::hardware_concurrency());
            if (workers <= 0) workers = 1;
        }
        size_ = workers;
        for (int w = 1; w < size_; ++w) {
            threads_.emplace_back([this, w] { worker_loop(w); });
        }
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        cv_start_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int size() const { return size_; }

    // fn(begin, end) is invoked once per non-empty block.
    void run(int count, const std::function<void(int, int)>& fn) {
        if (count <= 0) return;
        if (size_ == 1) {
            fn(0, count);
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            job_ = &fn;
            count_ = count;
            pending_ = size_ - 1;
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++generation_;
        }
        cv_start_.notify_all();
        block(0, count, fn);  // block 0 runs on the calling thread
        std::unique_lock<std::mutex> lock(mutex_);
        cv_done_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

  private:
    void block(int w, int count, const std::function<void(int, int)>& fn) {
        // ceil-partition so every index is covered and blocks differ by <= 1
        const int per = (count + size_ - 1) / size_;
        const int begin = w * per;
        const int end = std::min(count, begin + per);
        if (begin < end) fn(begin, end);
    }

    void worker_loop(int w) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int, int)>* job = nullptr;
            int count = 0;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_start_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                job = job_;
                count = count_;
            }
            if (job) block(w, count, *job);
            {
                std::lock_guard<std::mutex> lock(mutex_);
                if (--pending_ == 0) cv_done_.notify_all();
            }
        }
    }

    int size_ = 1;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_start_;
    std::condition_variable cv_done_;
    const std::function<void(int, int)>* job_ = nullptr;
    int count_ = 0;
    int pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace pack
