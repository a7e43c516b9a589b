#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace saliex {

using IPoint3 = std::array<std::int64_t, 3>;

namespace detail {

inline IPoint3 sub(const IPoint3& a, const IPoint3& b) noexcept { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

inline IPoint3 cross(const IPoint3& a, const IPoint3& b) noexcept {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline std::int64_t dot(const IPoint3& a, const IPoint3& b) noexcept { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Six times the signed volume of tetrahedron (a,b,c,d); positive when d lies
/// on the side the normal (b-a)x(c-a) points to.
inline std::int64_t orient(const IPoint3& a, const IPoint3& b, const IPoint3& c, const IPoint3& d) noexcept {
    return dot(cross(sub(b, a), sub(c, a)), sub(d, a));
}

} // namespace detail

/// Volume of the 3-D convex hull of integer points, by incremental
/// construction with exact arithmetic. Returns 0 when all points are coplanar.
inline double convex_hull_volume(std::vector<IPoint3> pts) {
    using detail::orient;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 4) return 0.0;

    // Initial non-degenerate tetrahedron.
    const IPoint3 p0 = pts[0];
    std::size_t i1 = 1;
    std::size_t i2 = 0;
    std::size_t i3 = 0;
    for (i2 = 2; i2 < pts.size(); ++i2) {
        const IPoint3 n = detail::cross(detail::sub(pts[i1], p0), detail::sub(pts[i2], p0));
        if (n[0] != 0 || n[1] != 0 || n[2] != 0) break;
    }
    if (i2 >= pts.size()) return 0.0;
    for (i3 = i2 + 1; i3 < pts.size(); ++i3)
        if (orient(p0, pts[i1], pts[i2], pts[i3]) != 0) break;
    if (i3 >= pts.size()) return 0.0;

    using Face = std::array<std::size_t, 3>;
    std::vector<Face> faces;
    const std::array<std::size_t, 4> tet{0, i1, i2, i3};
    for (int skip = 0; skip < 4; ++skip) {
        std::array<std::size_t, 3> f{};
        int k = 0;
        for (int v = 0; v < 4; ++v)
            if (v != skip) f[static_cast<std::size_t>(k++)] = tet[static_cast<std::size_t>(v)];
        if (orient(pts[f[0]], pts[f[1]], pts[f[2]], pts[tet[static_cast<std::size_t>(skip)]]) > 0) std::swap(f[1], f[2]);
        faces.push_back(f);
    }

    std::vector<char> visible;
    for (std::size_t p = 1; p < pts.size(); ++p) {
        if (p == i1 || p == i2 || p == i3) continue;
        visible.assign(faces.size(), 0);
        bool any = false;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (orient(pts[faces[f][0]], pts[faces[f][1]], pts[faces[f][2]], pts[p]) > 0) {
                visible[f] = 1;
                any = true;
            }
        }
        if (!any) continue;

        std::set<std::pair<std::size_t, std::size_t>> visible_edges;
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (visible[f])
                for (int e = 0; e < 3; ++e)
                    visible_edges.emplace(faces[f][static_cast<std::size_t>(e)], faces[f][static_cast<std::size_t>((e + 1) % 3)]);

        std::vector<Face> next;
        next.reserve(faces.size() + 8);
        for (std::size_t f = 0; f < faces.size(); ++f)
            if (!visible[f]) next.push_back(faces[f]);
        // Horizon edges keep their direction; their twins belong to hidden faces.
        for (const auto& [a, b] : visible_edges)
            if (!visible_edges.count({b, a})) next.push_back({a, b, p});
        faces = std::move(next);
    }

    std::int64_t six_volume = 0;
    for (const auto& f : faces) six_volume -= orient(pts[f[0]], pts[f[1]], pts[f[2]], p0);
    return static_cast<double>(six_volume) / 6.0;
}

} // namespace saliex
