#include "ffcnn/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace ffcnn {

namespace {

std::atomic<int> g_threads{0};

// Persistent pool: kernels dispatch chunk tasks millions of times per run,
// so spawning threads per call would dominate small batches.
class Pool {
   public:
    explicit Pool(int workers) : stop_(false), epoch_(0), pending_(0) {
        for (int i = 0; i < workers; ++i) {
            threads_.emplace_back([this, i] { worker_loop(i + 1); });
        }
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
            ++epoch_;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int lanes() const { return static_cast<int>(threads_.size()) + 1; }

    // Only one caller may drive the pool at a time; contenders fall back to
    // inline execution (sweep cells running concurrently stay correct).
    bool try_run(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
        if (!dispatch_mu_.try_lock()) return false;
        int lane_count = lanes();
        {
            std::lock_guard<std::mutex> lk(mu_);
            job_ = &fn;
            job_n_ = n;
            job_lanes_ = lane_count;
            pending_ = static_cast<int>(threads_.size());
            ++epoch_;
        }
        cv_.notify_all();
        run_lane(0, n, lane_count, fn);
        {
            std::unique_lock<std::mutex> lk(mu_);
            done_cv_.wait(lk, [this] { return pending_ == 0; });
            job_ = nullptr;
        }
        dispatch_mu_.unlock();
        return true;
    }

   private:
    static void run_lane(int lane, int64_t n, int lanes, const std::function<void(int64_t, int64_t)>& fn) {
        int64_t chunk = (n + lanes - 1) / lanes;
        int64_t begin = lane * chunk;
        int64_t end = begin + chunk < n ? begin + chunk : n;
        if (begin < end) fn(begin, end);
    }

    void worker_loop(int lane) {
        uint64_t seen = 0;
        for (;;) {
            const std::function<void(int64_t, int64_t)>* job = nullptr;
            int64_t n = 0;
            int lane_count = 0;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return epoch_ != seen; });
                seen = epoch_;
                if (stop_) return;
                job = job_;
                n = job_n_;
                lane_count = job_lanes_;
            }
            if (job && lane < lane_count) run_lane(lane, n, lane_count, *job);
            {
                std::lock_guard<std::mutex> lk(mu_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex dispatch_mu_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    bool stop_;
    uint64_t epoch_;
    int pending_;
    const std::function<void(int64_t, int64_t)>* job_ = nullptr;
    int64_t job_n_ = 0;
    int job_lanes_ = 0;
};

Pool& pool() {
    static Pool p(worker_threads() - 1);
    return p;
}

}  // namespace

void set_worker_threads(int n) { g_threads.store(n); }

int worker_threads() {
    int n = g_threads.load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    static thread_local bool inside = false;
    if (inside || worker_threads() == 1 || n == 1) {
        fn(0, n);
        return;
    }
    inside = true;
    if (!pool().try_run(n, fn)) fn(0, n);
    inside = false;
}

}  // namespace ffcnn
