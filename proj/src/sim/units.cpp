#include "cflow/sim/units.hpp"

#include <algorithm>
#include <stdexcept>

namespace cflow::sim {

DelayLine::DelayLine(std::int64_t length) : buf_(static_cast<std::size_t>(length), 0) {
    if (length < 1)
        throw std::invalid_argument("delay line length must be positive");
}

std::int64_t DelayLine::shift(std::int64_t in) {
    std::int64_t out = buf_[pos_];
    buf_[pos_] = in;
    pos_ = pos_ + 1 == buf_.size() ? 0 : pos_ + 1;
    return out;
}

KpuUnit::KpuUnit(int f, int k, std::int64_t C, ChainOp op)
    : f_(f), k_(k), C_(C), op_(op), w_(static_cast<std::size_t>(C * k * k), 0), z_(static_cast<std::size_t>(k * k), 0) {
    if (k < 1 || f < k || C < 1)
        throw std::invalid_argument("KPU needs 1 <= k <= f and C >= 1");
    // links_[idx-1] feeds tap idx from tap idx-1.
    for (int idx = 1; idx < k * k; ++idx) {
        std::int64_t positions = idx % k == 0 ? f - k + 1 : 1;
        links_.emplace_back(positions * C);
    }
}

void KpuUnit::set_weights(std::int64_t config, const std::vector<std::int64_t>& w) {
    if (config < 0 || config >= C_ || w.size() != static_cast<std::size_t>(k_ * k_))
        throw std::invalid_argument("KPU weight bank index or size out of range");
    std::copy(w.begin(), w.end(), w_.begin() + config * k_ * k_);
}

std::int64_t KpuUnit::step(std::int64_t x, std::uint32_t pad_mask, std::int64_t config) {
    const std::int64_t* w = w_.data() + config * k_ * k_;
    std::int64_t prev = 0;
    for (int idx = 0; idx < k_ * k_; ++idx) {
        std::int64_t delayed = idx == 0 ? 0 : links_[static_cast<std::size_t>(idx - 1)].shift(prev);
        bool enabled = (pad_mask >> (idx % k_)) & 1u;
        std::int64_t z;
        if (op_ == ChainOp::Max)
            z = idx == 0 ? x : std::max(delayed, x);
        else
            z = delayed + (enabled ? w[idx] * x : 0);
        prev = z;
        z_[static_cast<std::size_t>(idx)] = z;
    }
    return prev;
}

std::int64_t KpuUnit::register_count() const {
    std::int64_t n = 0;
    for (const auto& l : links_)
        n += l.length();
    return n;
}

FcuUnit::FcuUnit(std::int64_t j, std::int64_t h, std::int64_t C)
    : j_(j), h_(h), C_(C), w_(static_cast<std::size_t>(C * j), 0), buf_(static_cast<std::size_t>(h), 0) {
    if (j < 1 || h < 1 || C < 1 || C % h != 0)
        throw std::invalid_argument("FCU needs j, h >= 1 and C a multiple of h");
}

void FcuUnit::set_weights(std::int64_t config, const std::vector<std::int64_t>& w) {
    if (config < 0 || config >= C_ || w.size() != static_cast<std::size_t>(j_))
        throw std::invalid_argument("FCU weight index or size out of range");
    std::copy(w.begin(), w.end(), w_.begin() + config * j_);
}

std::int64_t FcuUnit::step(const std::vector<std::int64_t>& x, std::int64_t config, std::int64_t preload) {
    std::size_t neuron = static_cast<std::size_t>(config % h_);
    q_ = config < h_ ? preload : buf_[neuron];
    std::int64_t acc = q_;
    const std::int64_t* w = w_.data() + config * j_;
    for (std::int64_t i = 0; i < j_; ++i)
        acc += w[i] * x[static_cast<std::size_t>(i)];
    buf_[neuron] = acc;
    return acc;
}

Aggregator::Aggregator(std::int64_t a) : regs_(static_cast<std::size_t>(a), 0) {
    if (a < 1)
        throw std::invalid_argument("aggregation factor must be positive");
}

void Aggregator::push(std::int64_t v) {
    std::rotate(regs_.begin(), regs_.begin() + 1, regs_.end());
    regs_.back() = v;
    filled_ = std::min<std::int64_t>(filled_ + 1, static_cast<std::int64_t>(regs_.size()));
}

} // namespace cflow::sim
