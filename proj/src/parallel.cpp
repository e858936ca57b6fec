#include "psboot/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace psboot {

void SerialExecutor::parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) const
{
    for (std::size_t i = 0; i < count; ++i) body(i);
}

const Executor& serial_executor()
{
    static const SerialExecutor instance;
    return instance;
}

ThreadPool::ThreadPool(std::size_t threads) : threads_(std::max<std::size_t>(1, threads)) {}

void ThreadPool::parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) const
{
    const std::size_t workers = std::min(threads_, count);
    if (workers <= 1) {
        serial_executor().parallel_for(count, body);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace psboot
