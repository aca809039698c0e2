#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rng.hpp"

namespace mobsched {

inline constexpr std::size_t kMaxInputLen = 8192;
inline constexpr std::size_t kPositionBuckets = 10;

enum class MutOp : std::uint8_t {
    BitFlip1,
    BitFlip2,
    BitFlip4,
    ByteFlip1,
    ByteFlip2,
    ByteFlip4,
    Arith8,
    Arith16,
    Arith32,
    InterestingValue,
    RandomByte,
    DeleteBlock,
    InsertBlock,
    OverwriteBlock,
    Splice,
};

inline constexpr std::size_t kNumOps = 15;

inline constexpr std::array<const char*, kNumOps> kOpNames = {
    "BitFlip1",  "BitFlip2",   "BitFlip4",         "ByteFlip1",   "ByteFlip2",
    "ByteFlip4", "Arith8",     "Arith16",          "Arith32",     "InterestingValue",
    "RandomByte", "DeleteBlock", "InsertBlock",     "OverwriteBlock", "Splice",
};

inline const char* to_string(MutOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

// Laplace-smoothed credit tables: sampling weight is credit + 1, so fresh
// tables draw uniformly and every choice stays reachable forever.
struct CreditTable {
    std::array<std::uint64_t, kNumOps> op_credit{};
    std::array<std::uint64_t, kPositionBuckets> pos_credit{};
};

inline MutOp pick_operator(const CreditTable& table, Rng& rng) {
    std::uint64_t total = 0;
    for (std::uint64_t c : table.op_credit) total += c + 1;
    std::uint64_t draw = rng.below(total);
    for (std::size_t i = 0; i < kNumOps; ++i) {
        const std::uint64_t w = table.op_credit[i] + 1;
        if (draw < w) return static_cast<MutOp>(i);
        draw -= w;
    }
    return MutOp::Splice;  // unreachable
}

// Relative-position decile of an offset within a buffer.
inline std::size_t decile_of(std::size_t offset, std::size_t len) {
    if (len == 0) return 0;
    const std::size_t d = offset * kPositionBuckets / len;
    return d >= kPositionBuckets ? kPositionBuckets - 1 : d;
}

// Samples a decile by smoothed credit over the deciles that map to a
// non-empty offset range for this length, then a uniform offset inside it.
inline std::size_t pick_position(const CreditTable& table, std::size_t len, Rng& rng) {
    if (len == 0) throw std::invalid_argument("pick_position on empty input");
    std::array<std::size_t, kPositionBuckets> starts{}, ends{};
    std::uint64_t total = 0;
    for (std::size_t d = 0; d < kPositionBuckets; ++d) {
        starts[d] = d * len / kPositionBuckets;
        ends[d] = (d + 1) * len / kPositionBuckets;
        if (ends[d] > starts[d]) total += table.pos_credit[d] + 1;
    }
    std::uint64_t draw = rng.below(total);
    for (std::size_t d = 0; d < kPositionBuckets; ++d) {
        if (ends[d] <= starts[d]) continue;
        const std::uint64_t w = table.pos_credit[d] + 1;
        if (draw < w) return starts[d] + rng.index(ends[d] - starts[d]);
        draw -= w;
    }
    return len - 1;  // unreachable
}

inline void credit_update(CreditTable& table, MutOp op, std::size_t bucket, bool improved) {
    if (!improved) return;
    table.op_credit[static_cast<std::size_t>(op)] += 1;
    table.pos_credit.at(bucket) += 1;
}

namespace detail {

inline constexpr std::array<std::int8_t, 9> kInteresting8 = {-128, -1, 0, 1, 16, 32, 64, 100, 127};
inline constexpr std::array<std::int16_t, 19> kInteresting16 = {
    -128, -1, 0, 1, 16, 32, 64, 100, 127,
    -32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767};
inline constexpr std::array<std::int32_t, 27> kInteresting32 = {
    -128, -1, 0, 1, 16, 32, 64, 100, 127,
    -32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767,
    -2147483647 - 1, -100663046, -32769, 32768, 65535, 65536, 100663045, 2147483647};

inline constexpr std::uint64_t kArithMax = 35;

template <typename T>
inline void store_le(std::vector<std::uint8_t>& buf, std::size_t off, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[off + i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i));
}

template <typename T>
inline T load_le(const std::vector<std::uint8_t>& buf, std::size_t off) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(buf[off + i]) << (8 * i);
    return static_cast<T>(v);
}

inline void flip_bits(std::vector<std::uint8_t>& buf, std::size_t offset, std::size_t n,
                      Rng& rng) {
    const std::size_t start = rng.index(8 - n + 1);
    for (std::size_t b = 0; b < n; ++b)
        buf[offset] ^= static_cast<std::uint8_t>(1u << (start + b));
}

template <typename T>
inline void arith(std::vector<std::uint8_t>& buf, std::size_t offset, Rng& rng) {
    const std::uint64_t delta = 1 + rng.below(kArithMax);
    const bool add = rng.chance(0.5);
    T v = load_le<T>(buf, offset);
    v = add ? static_cast<T>(v + static_cast<T>(delta)) : static_cast<T>(v - static_cast<T>(delta));
    store_le(buf, offset, v);
}

}  // namespace detail

// Applies one operator at the given byte offset. The input is never consumed
// and the result is never empty. Structural operators (DeleteBlock,
// InsertBlock, Splice) change length; the rest preserve it. Splice and
// OverwriteBlock take their foreign bytes from `donor` when one is supplied.
inline std::vector<std::uint8_t> apply_operator(MutOp op, std::span<const std::uint8_t> input,
                                                std::size_t offset, Rng& rng,
                                                std::span<const std::uint8_t> donor = {}) {
    if (input.empty()) throw std::invalid_argument("apply_operator on empty input");
    std::vector<std::uint8_t> buf(input.begin(), input.end());
    const std::size_t len = buf.size();
    if (offset >= len) offset = len - 1;

    using namespace detail;
    switch (op) {
        case MutOp::BitFlip1:
            flip_bits(buf, offset, 1, rng);
            break;
        case MutOp::BitFlip2:
            flip_bits(buf, offset, 2, rng);
            break;
        case MutOp::BitFlip4:
            flip_bits(buf, offset, 4, rng);
            break;
        case MutOp::ByteFlip1:
            buf[offset] ^= 0xff;
            break;
        case MutOp::ByteFlip2:
            for (std::size_t i = 0; i < 2 && offset + i < len; ++i) buf[offset + i] ^= 0xff;
            break;
        case MutOp::ByteFlip4:
            for (std::size_t i = 0; i < 4 && offset + i < len; ++i) buf[offset + i] ^= 0xff;
            break;
        case MutOp::Arith8:
            arith<std::uint8_t>(buf, offset, rng);
            break;
        case MutOp::Arith16:
            if (offset + 2 <= len)
                arith<std::uint16_t>(buf, offset, rng);
            else
                arith<std::uint8_t>(buf, offset, rng);
            break;
        case MutOp::Arith32:
            if (offset + 4 <= len)
                arith<std::uint32_t>(buf, offset, rng);
            else if (offset + 2 <= len)
                arith<std::uint16_t>(buf, offset, rng);
            else
                arith<std::uint8_t>(buf, offset, rng);
            break;
        case MutOp::InterestingValue: {
            std::size_t width = std::size_t{1} << rng.index(3);  // 1, 2 or 4
            while (offset + width > len) width >>= 1;
            if (width == 4)
                store_le(buf, offset, static_cast<std::uint32_t>(
                                          kInteresting32[rng.index(kInteresting32.size())]));
            else if (width == 2)
                store_le(buf, offset, static_cast<std::uint16_t>(
                                          kInteresting16[rng.index(kInteresting16.size())]));
            else
                buf[offset] =
                    static_cast<std::uint8_t>(kInteresting8[rng.index(kInteresting8.size())]);
            break;
        }
        case MutOp::RandomByte:
            buf[offset] ^= static_cast<std::uint8_t>(1 + rng.below(255));
            break;
        case MutOp::DeleteBlock: {
            if (len < 2) break;  // identity on one-byte inputs: result must stay non-empty
            const std::size_t max_del = std::min(len - offset, len - 1);
            const std::size_t n = 1 + rng.index(max_del);
            buf.erase(buf.begin() + static_cast<std::ptrdiff_t>(offset),
                      buf.begin() + static_cast<std::ptrdiff_t>(offset + n));
            break;
        }
        case MutOp::InsertBlock: {
            if (len >= kMaxInputLen) break;
            std::size_t n = 1 + rng.index(32);
            if (len + n > kMaxInputLen) n = kMaxInputLen - len;
            std::vector<std::uint8_t> block(n);
            if (rng.chance(0.75)) {
                const std::size_t src = rng.index(len);
                for (std::size_t i = 0; i < n; ++i) block[i] = buf[(src + i) % len];
            } else {
                const auto fill = static_cast<std::uint8_t>(rng.below(256));
                std::fill(block.begin(), block.end(), fill);
            }
            buf.insert(buf.begin() + static_cast<std::ptrdiff_t>(offset), block.begin(),
                       block.end());
            break;
        }
        case MutOp::OverwriteBlock: {
            const std::size_t n = 1 + rng.index(std::min<std::size_t>(16, len - offset));
            std::span<const std::uint8_t> src = donor.empty() ? std::span<const std::uint8_t>(input) : donor;
            const std::size_t from = rng.index(src.size());
            for (std::size_t i = 0; i < n; ++i) buf[offset + i] = src[(from + i) % src.size()];
            break;
        }
        case MutOp::Splice: {
            std::span<const std::uint8_t> other =
                donor.empty() ? std::span<const std::uint8_t>(input) : donor;
            const std::size_t cut = rng.index(other.size());  // keeps at least one donor byte
            buf.resize(offset);
            buf.insert(buf.end(), other.begin() + static_cast<std::ptrdiff_t>(cut), other.end());
            if (buf.size() > kMaxInputLen) buf.resize(kMaxInputLen);
            if (buf.empty()) buf.push_back(input[0]);
            break;
        }
    }
    return buf;
}

// Two-point crossover over the shared prefix, keeping both children. The
// segment [cut1, cut2) is exchanged; tails beyond the shorter parent stay
// with their owner.
inline std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> crossover(
    std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, Rng& rng) {
    if (a.empty() || b.empty()) throw std::invalid_argument("crossover needs non-empty parents");
    const std::size_t m = std::min(a.size(), b.size());
    std::size_t c1 = rng.index(m + 1);
    std::size_t c2 = rng.index(m + 1);
    if (c1 > c2) std::swap(c1, c2);
    std::vector<std::uint8_t> child_a(a.begin(), a.end());
    std::vector<std::uint8_t> child_b(b.begin(), b.end());
    for (std::size_t i = c1; i < c2; ++i) {
        child_a[i] = b[i];
        child_b[i] = a[i];
    }
    return {std::move(child_a), std::move(child_b)};
}

inline nlohmann::json credit_table_to_json(const CreditTable& t) {
    nlohmann::json j;
    for (std::size_t i = 0; i < kNumOps; ++i) j["operators"][kOpNames[i]] = t.op_credit[i];
    j["positions"] = t.pos_credit;
    return j;
}

inline CreditTable credit_table_from_json(const nlohmann::json& j) {
    CreditTable t;
    for (std::size_t i = 0; i < kNumOps; ++i)
        t.op_credit[i] = j.at("operators").at(kOpNames[i]).get<std::uint64_t>();
    const auto& pos = j.at("positions");
    for (std::size_t i = 0; i < kPositionBuckets; ++i) t.pos_credit[i] = pos.at(i);
    return t;
}

}  // namespace mobsched
