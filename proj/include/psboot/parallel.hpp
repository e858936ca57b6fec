#pragma once

#include <cstddef>
#include <functional>

namespace psboot {

/// Runs independent replicate bodies. Library routines accept an Executor but
/// never create threads themselves; the caller decides the concurrency.
class Executor {
public:
    virtual ~Executor() = default;
    virtual void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) const = 0;
    virtual std::size_t concurrency() const = 0;
};

class SerialExecutor final : public Executor {
public:
    void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) const override;
    std::size_t concurrency() const override { return 1; }
};

const Executor& serial_executor();

/// Fixed-size worker group. Indices are claimed dynamically; the first
/// exception thrown by any body is rethrown on the calling thread.
class ThreadPool final : public Executor {
public:
    explicit ThreadPool(std::size_t threads);
    void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) const override;
    std::size_t concurrency() const override { return threads_; }

private:
    std::size_t threads_;
};

}  // namespace psboot
