#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

namespace hcmm {

// Multi-producer, single-consumer FIFO. pop() blocks until a message arrives
// or the channel is closed and drained.
template <typename M>
class Channel {
public:
    void push(M message) {
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(message));
        }
        cv_.notify_one();
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    std::optional<M> pop() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
        if (queue_.empty()) return std::nullopt;
        M m = std::move(queue_.front());
        queue_.pop_front();
        return m;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<M> queue_;
    bool closed_ = false;
};

}  // namespace hcmm
