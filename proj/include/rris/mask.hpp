#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rris/error.hpp"

namespace rris {

/// Binary segmentation mask. Pixels are addressed column-major
/// (flat index = x * height + y) and packed 64 per word.
class BinaryMask {
public:
    BinaryMask() = default;

    BinaryMask(std::size_t width, std::size_t height) : width_(width), height_(height) {
        if (width == 0 || height == 0)
            throw Error(ErrorCode::invalid_argument, "mask dimensions must be positive");
        words_.assign((width * height + 63) / 64, 0);
    }

    static BinaryMask full(std::size_t width, std::size_t height) {
        BinaryMask mask(width, height);
        for (std::size_t i = 0; i < mask.pixel_count(); ++i) mask.set_flat(i, true);
        return mask;
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }

    bool test_flat(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }

    void set_flat(std::size_t i, bool on) {
        const std::uint64_t bit = std::uint64_t{1} << (i & 63);
        if (on)
            words_[i >> 6] |= bit;
        else
            words_[i >> 6] &= ~bit;
    }

    bool test(std::size_t x, std::size_t y) const { return test_flat(x * height_ + y); }
    void set(std::size_t x, std::size_t y, bool on = true) { set_flat(x * height_ + y, on); }

    std::size_t area() const noexcept {
        std::size_t total = 0;
        for (std::uint64_t w : words_) total += static_cast<std::size_t>(std::popcount(w));
        return total;
    }

    bool same_shape(const BinaryMask& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Uncompressed COCO-layout run-length mask: column-major runs that
/// alternate background/foreground, starting with background.
struct RleMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint64_t> counts;

    friend bool operator==(const RleMask&, const RleMask&) = default;
};

inline std::size_t area(const BinaryMask& mask) { return mask.area(); }

inline RleMask rle_encode(const BinaryMask& mask) {
    RleMask rle{mask.width(), mask.height(), {}};
    bool current = false;
    std::uint64_t run = 0;
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
        const bool bit = mask.test_flat(i);
        if (bit != current) {
            rle.counts.push_back(run);
            run = 0;
            current = bit;
        }
        ++run;
    }
    rle.counts.push_back(run);
    return rle;
}

inline void check_rle(const RleMask& rle) {
    if (rle.width == 0 || rle.height == 0)
        throw Error(ErrorCode::malformed_rle, "rle dimensions must be positive");
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        if (i > 0 && rle.counts[i] == 0 && rle.counts[i - 1] == 0)
            throw Error(ErrorCode::malformed_rle, "adjacent zero-length runs at position " + std::to_string(i));
        total += rle.counts[i];
    }
    if (total != rle.width * rle.height)
        throw Error(ErrorCode::malformed_rle, "run lengths sum to " + std::to_string(total) + ", expected " +
                                                  std::to_string(rle.width * rle.height));
}

inline BinaryMask rle_decode(const RleMask& rle) {
    check_rle(rle);
    BinaryMask mask(rle.width, rle.height);
    std::size_t pos = 0;
    bool on = false;
    for (std::uint64_t run : rle.counts) {
        if (on)
            for (std::uint64_t k = 0; k < run; ++k) mask.set_flat(pos + k, true);
        pos += run;
        on = !on;
    }
    return mask;
}

namespace detail {
inline void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b))
        throw Error(ErrorCode::shape_mismatch, std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                                   " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
}
}  // namespace detail

inline std::size_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
    detail::require_same_shape(a, b);
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.words().size(); ++i)
        total += static_cast<std::size_t>(std::popcount(a.words()[i] & b.words()[i]));
    return total;
}

inline std::size_t union_area(const BinaryMask& a, const BinaryMask& b) {
    detail::require_same_shape(a, b);
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.words().size(); ++i)
        total += static_cast<std::size_t>(std::popcount(a.words()[i] | b.words()[i]));
    return total;
}

/// Empty-vs-empty is a perfect match: both masks empty gives 1.0.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    const std::size_t uni = union_area(a, b);
    if (uni == 0) return 1.0;
    return static_cast<double>(intersection_area(a, b)) / static_cast<double>(uni);
}

// JSON form: {"size": [height, width], "counts": [...]}

inline nlohmann::json to_json(const RleMask& rle) {
    return nlohmann::json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

inline RleMask rle_from_json(const nlohmann::json& j) {
    try {
        const auto& size = j.at("size");
        if (!size.is_array() || size.size() != 2)
            throw Error(ErrorCode::parse_error, "rle \"size\" must be [height, width]");
        RleMask rle;
        rle.height = size.at(0).get<std::size_t>();
        rle.width = size.at(1).get<std::size_t>();
        for (const auto& c : j.at("counts")) {
            if (!c.is_number_integer() || c.get<std::int64_t>() < 0)
                throw Error(ErrorCode::malformed_rle, "rle counts must be non-negative integers");
            rle.counts.push_back(c.get<std::uint64_t>());
        }
        check_rle(rle);
        return rle;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("bad rle object: ") + e.what());
    }
}

}  // namespace rris
