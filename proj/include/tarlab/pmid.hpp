#pragma once

#include <algorithm>
#include <string_view>

namespace tarlab {

// Numeric identifiers compare by value (so "99" < "100"); anything else falls
// back to byte order. All-digit ids sort before mixed ids.
inline bool pmid_less(std::string_view a, std::string_view b) noexcept
{
    auto all_digits = [](std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    const bool da = all_digits(a);
    const bool db = all_digits(b);
    if (da != db) {
        return da;
    }
    if (da) {
        auto strip = [](std::string_view s) {
            const auto nz = s.find_first_not_of('0');
            return nz == std::string_view::npos ? std::string_view{} : s.substr(nz);
        };
        const auto sa = strip(a);
        const auto sb = strip(b);
        if (sa.size() != sb.size()) {
            return sa.size() < sb.size();
        }
        if (sa != sb) {
            return sa < sb;
        }
    }
    return a < b;
}

struct PmidLess {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const noexcept { return pmid_less(a, b); }
};

}  // namespace tarlab
