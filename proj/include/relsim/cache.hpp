#pragma once

// Deterministic hit-ratio L1 cache model. Traces carry no addresses, so hits
// follow a fixed p-in-q pattern: accesses at phase < p hit, the rest miss,
// phase advancing modulo q. Reads and writes share one counter stream.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace relsim {

struct HitRate {
    std::int64_t p = 1;
    std::int64_t q = 1;

    HitRate() = default;
    HitRate(std::int64_t p_, std::int64_t q_) : p(p_), q(q_) {
        if (q <= 0 || p < 0 || p > q) throw std::invalid_argument("hit rate must be p/q in [0,1]");
    }

    /// Parses "p/q" or a bare integer ("1" == always hit).
    static HitRate parse(const std::string& s) {
        auto slash = s.find('/');
        if (slash == std::string::npos) return HitRate(std::stoll(s), 1);
        return HitRate(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }

    std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }
    bool operator==(const HitRate&) const = default;
};

class CacheModel {
public:
    CacheModel() = default;
    CacheModel(std::int64_t size_bits, std::int64_t line_bits, HitRate rate)
        : size_bits_(size_bits), line_bits_(line_bits), rate_(rate) {}

    enum class Result { Hit, Miss };

    Result access() {
        const Result r = (phase_ < rate_.p) ? Result::Hit : Result::Miss;
        phase_ = (phase_ + 1) % rate_.q;
        ++access_count_;
        if (r == Result::Hit) ++hit_count_;
        return r;
    }

    /// Number of consecutive hits from the current phase before the next
    /// miss; used by the kernel to batch hit processing into one event.
    std::int64_t hits_until_miss() const {
        if (rate_.p == rate_.q) return -1; // never misses
        return phase_ < rate_.p ? rate_.p - phase_ : 0;
    }

    std::int64_t size_bits() const { return size_bits_; }
    std::int64_t line_bits() const { return line_bits_; }
    const HitRate& rate() const { return rate_; }
    std::int64_t access_count() const { return access_count_; }
    std::int64_t hit_count() const { return hit_count_; }
    std::int64_t miss_count() const { return access_count_ - hit_count_; }

private:
    std::int64_t size_bits_ = 32 * 1024 * 8;
    std::int64_t line_bits_ = 1024;
    HitRate rate_{3, 4};
    std::int64_t phase_ = 0;
    std::int64_t access_count_ = 0;
    std::int64_t hit_count_ = 0;
};

} // namespace relsim
