#pragma once

#include <cstdint>
#include <vector>

namespace cflow::sim {

// Shift register of fixed length; shift() returns the value pushed `length` shifts ago.
class DelayLine {
public:
    explicit DelayLine(std::int64_t length = 1);
    std::int64_t shift(std::int64_t in);
    std::int64_t length() const { return static_cast<std::int64_t>(buf_.size()); }

private:
    std::vector<std::int64_t> buf_;
    std::size_t pos_ = 0;
};

enum class ChainOp { MultiplyAdd, Max };

// Transposed-form sliding-window engine (KPU, or PPU with ChainOp::Max).
// Tap idx = i*k + j holds z_{n,idx}, the partial sum over taps 0..idx of the
// window starting at stream position n = t - (i*f + j). Row links delay by
// f-k+1 positions, column links by one; each delay is scaled by C.
class KpuUnit {
public:
    KpuUnit(int f, int k, std::int64_t C, ChainOp op = ChainOp::MultiplyAdd);

    // k*k weights for configuration `config`, tap order.
    void set_weights(std::int64_t config, const std::vector<std::int64_t>& w);

    // One step with input x under configuration `config`. Bit j of `pad_mask`
    // enables kernel column j. Returns the last tap (the window result).
    std::int64_t step(std::int64_t x, std::uint32_t pad_mask, std::int64_t config);

    std::int64_t tap(int idx) const { return z_[static_cast<std::size_t>(idx)]; }
    int k() const { return k_; }
    int f() const { return f_; }
    std::int64_t configurations() const { return C_; }
    // Stream positions between a window start and its result.
    std::int64_t latency() const { return std::int64_t{k_ - 1} * (f_ + 1); }
    // Registers held by the chain, (k(k-1) + (k-1)(f-k+1)) * C.
    std::int64_t register_count() const;

private:
    int f_;
    int k_;
    std::int64_t C_;
    ChainOp op_;
    std::vector<std::int64_t> w_;
    std::vector<DelayLine> links_;
    std::vector<std::int64_t> z_;
};

// Holds j inputs for h cycles and accumulates h neurons in a depth-h buffer.
class FcuUnit {
public:
    FcuUnit(std::int64_t j, std::int64_t h, std::int64_t C);

    void set_weights(std::int64_t config, const std::vector<std::int64_t>& w);

    // Config = batch*h + neuron. On the first batch the buffer is replaced by `preload`.
    std::int64_t step(const std::vector<std::int64_t>& x, std::int64_t config, std::int64_t preload);

    // Buffer value read this step.
    std::int64_t q() const { return q_; }
    std::int64_t j() const { return j_; }
    std::int64_t h() const { return h_; }

private:
    std::int64_t j_;
    std::int64_t h_;
    std::int64_t C_;
    std::vector<std::int64_t> w_;
    std::vector<std::int64_t> buf_;
    std::int64_t q_ = 0;
};

// Serial-to-parallel shift register feeding an FCU.
class Aggregator {
public:
    explicit Aggregator(std::int64_t a);
    void push(std::int64_t v);
    // Oldest first.
    const std::vector<std::int64_t>& contents() const { return regs_; }
    std::int64_t filled() const { return filled_; }

private:
    std::vector<std::int64_t> regs_;
    std::int64_t filled_ = 0;
};

} // namespace cflow::sim
