#pragma once

// Cell-centred grid domains in 1D and 2D: rasterization, distance to the
// discrete boundary, dilation/erosion, and the discrete topology criteria.

#include <algorithm>
#include <array>
#include <limits>
#include <tuple>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "blowup/error.hpp"

namespace blowup {

using json = nlohmann::json;

struct GridDomain {
    int dims = 2;
    int nx = 0, ny = 1;
    double h = 0.0;
    double x0 = 0.0, y0 = 0.0;  // lower-left corner of the bounding box
    std::vector<std::uint8_t> mask;
    std::string label;
    json descriptor;

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    int col(int idx) const { return idx % nx; }
    int row(int idx) const { return idx / nx; }
    double cx(int idx) const { return x0 + (col(idx) + 0.5) * h; }
    double cy(int idx) const { return dims == 1 ? 0.0 : y0 + (row(idx) + 0.5) * h; }
    bool inside(int idx) const { return idx >= 0 && mask[idx] != 0; }

    int count() const { return static_cast<int>(std::count(mask.begin(), mask.end(), 1)); }

    // face neighbours; -1 beyond the bounding box
    std::array<int, 4> neighbors(int idx) const
    {
        const int i = col(idx), j = row(idx);
        std::array<int, 4> nb{-1, -1, -1, -1};
        nb[0] = i > 0 ? idx - 1 : -1;
        nb[1] = i + 1 < nx ? idx + 1 : -1;
        if (dims == 2) {
            nb[2] = j > 0 ? idx - nx : -1;
            nb[3] = j + 1 < ny ? idx + nx : -1;
        }
        return nb;
    }
    int neighbor_count() const { return 2 * dims; }

    bool on_bbox_edge(int idx) const
    {
        const int i = col(idx), j = row(idx);
        return i == 0 || i == nx - 1 || (dims == 2 && (j == 0 || j == ny - 1));
    }

    // cells of the set with a face neighbour outside it
    bool is_boundary(int idx) const
    {
        if (!inside(idx)) return false;
        const auto nb = neighbors(idx);
        for (int k = 0; k < neighbor_count(); ++k)
            if (!inside(nb[k])) return true;
        return false;
    }

    std::vector<int> boundary_cells() const
    {
        std::vector<int> out;
        for (int idx = 0; idx < size(); ++idx)
            if (is_boundary(idx)) out.push_back(idx);
        return out;
    }

    std::vector<int> interior_cells() const
    {
        std::vector<int> out;
        for (int idx = 0; idx < size(); ++idx)
            if (inside(idx) && !is_boundary(idx)) out.push_back(idx);
        return out;
    }

    bool same_grid(const GridDomain& o) const
    {
        return dims == o.dims && nx == o.nx && ny == o.ny && std::abs(h - o.h) <= 1e-14 * h &&
               std::abs(x0 - o.x0) <= 1e-12 && std::abs(y0 - o.y0) <= 1e-12;
    }

    GridDomain with_mask(std::vector<std::uint8_t> m, std::string new_label) const
    {
        GridDomain d = *this;
        d.mask = std::move(m);
        d.label = std::move(new_label);
        return d;
    }

    json grid_json() const
    {
        return {{"dims", dims}, {"nx", nx}, {"ny", ny}, {"h", h}, {"x0", x0}, {"y0", y0}};
    }

    void write_pgm(std::ostream& os) const
    {
        os << "P2\n" << nx << " " << ny << "\n255\n";
        for (int j = ny - 1; j >= 0; --j) {
            for (int i = 0; i < nx; ++i) os << (i ? " " : "") << (mask[index(i, j)] ? 255 : 0);
            os << "\n";
        }
    }

    void write_centers_csv(std::ostream& os) const
    {
        os << "i,j,x,y\n";
        os.precision(17);
        for (int idx = 0; idx < size(); ++idx)
            if (inside(idx)) os << col(idx) << "," << row(idx) << "," << cx(idx) << "," << cy(idx) << "\n";
    }
};

inline void require_same_grid(const GridDomain& a, const GridDomain& b)
{
    if (!a.same_grid(b)) fail(ErrorCode::GridMismatch, "fields live on different grids");
}

// ---------------------------------------------------------------- shapes

namespace detail {

struct Shape {
    std::function<bool(double, double)> contains;
    double xmin, xmax, ymin, ymax;
};

inline std::pair<double, double> pair_of(const json& j, const char* key)
{
    const auto& a = j.at(key);
    return {a.at(0).get<double>(), a.at(1).get<double>()};
}

inline Shape parse_shape(const json& j, int& dims)
{
    const std::string type = j.at("type").get<std::string>();
    if (type == "interval") {
        dims = 1;
        const double a = j.at("a").get<double>(), b = j.at("b").get<double>();
        if (!(b > a)) fail(ErrorCode::InvalidArgument, "interval needs a < b");
        return {[a, b](double x, double) { return x > a && x < b; }, a, b, 0, 0};
    }
    dims = 2;
    if (type == "disk") {
        const auto [cx, cy] = pair_of(j, "center");
        const double r = j.at("radius").get<double>();
        return {[=](double x, double y) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r; }, cx - r, cx + r,
                cy - r, cy + r};
    }
    if (type == "annulus") {
        const auto [cx, cy] = pair_of(j, "center");
        const double r1 = j.at("r_inner").get<double>(), r2 = j.at("r_outer").get<double>();
        if (!(r2 > r1 && r1 > 0)) fail(ErrorCode::InvalidArgument, "annulus needs 0 < r_inner < r_outer");
        return {[=](double x, double y) {
                    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    return d2 < r2 * r2 && d2 > r1 * r1;
                },
                cx - r2, cx + r2, cy - r2, cy + r2};
    }
    if (type == "rectangle") {
        const auto [ax, ay] = pair_of(j, "min");
        const auto [bx, by] = pair_of(j, "max");
        if (!(bx > ax && by > ay)) fail(ErrorCode::InvalidArgument, "rectangle needs min < max");
        return {[=](double x, double y) { return x > ax && x < bx && y > ay && y < by; }, ax, bx, ay, by};
    }
    if (type == "union" || type == "difference") {
        std::vector<Shape> parts;
        if (type == "union") {
            for (const auto& p : j.at("parts")) parts.push_back(parse_shape(p, dims));
        } else {
            parts.push_back(parse_shape(j.at("base"), dims));
            parts.push_back(parse_shape(j.at("minus"), dims));
        }
        if (parts.empty()) fail(ErrorCode::InvalidArgument, "union needs parts");
        Shape s = parts.front();
        if (type == "union") {
            for (const auto& p : parts) {
                s.xmin = std::min(s.xmin, p.xmin);
                s.xmax = std::max(s.xmax, p.xmax);
                s.ymin = std::min(s.ymin, p.ymin);
                s.ymax = std::max(s.ymax, p.ymax);
            }
            s.contains = [parts](double x, double y) {
                for (const auto& p : parts)
                    if (p.contains(x, y)) return true;
                return false;
            };
        } else {
            const Shape base = parts[0], minus = parts[1];
            s.contains = [base, minus](double x, double y) { return base.contains(x, y) && !minus.contains(x, y); };
        }
        dims = 2;
        return s;
    }
    if (type == "dumbbell") {
        // two disks joined by a horizontal bar
        const auto [ax, ay] = pair_of(j, "left");
        const auto [bx, by] = pair_of(j, "right");
        const double r = j.at("radius").get<double>(), w = j.at("bar_width").get<double>();
        const double ym = 0.5 * (ay + by);
        return {[=](double x, double y) {
                    return (x - ax) * (x - ax) + (y - ay) * (y - ay) < r * r ||
                           (x - bx) * (x - bx) + (y - by) * (y - by) < r * r ||
                           (x > ax && x < bx && std::abs(y - ym) < 0.5 * w);
                },
                std::min(ax, bx) - r, std::max(ax, bx) + r, std::min(ay, by) - r, std::max(ay, by) + r};
    }
    fail(ErrorCode::InvalidArgument, "unknown shape type '" + type + "'");
}

} // namespace detail

// descriptor: a shape ({"type": interval|disk|annulus|rectangle|union|
// difference|dumbbell|disk_with_slit|rectangle_with_slit, ...}) plus "h" and
// optional "margin" (cells of empty frame, default 8)
inline GridDomain make_domain(const json& desc)
{
    try {
        const double h = desc.at("h").get<double>();
        if (!(h > 0)) fail(ErrorCode::InvalidArgument, "h must be positive");
        const int margin = desc.value("margin", 8);
        if (margin < 2) fail(ErrorCode::InvalidArgument, "margin must be at least 2 cells");
        const std::string type = desc.at("type").get<std::string>();

        json shape_desc = desc;
        int slit_width = 0;
        std::string label = type;
        if (type == "disk_with_slit") {
            shape_desc["type"] = "disk";
            slit_width = desc.value("slit_width", 1);
        } else if (type == "rectangle_with_slit") {
            shape_desc["type"] = "rectangle";
            slit_width = desc.value("slit_width", 1);
        }
        if (slit_width < 0) fail(ErrorCode::InvalidArgument, "slit_width must be >= 0");
        // wider than one cell is an ordinary cut, not a slit the closure heals
        if (slit_width > 1) label = type.substr(0, type.find('_')) + "_with_cut";

        int dims = 2;
        const detail::Shape shape = detail::parse_shape(shape_desc, dims);
        GridDomain d;
        d.dims = dims;
        d.h = h;
        const long fx0 = static_cast<long>(std::floor(shape.xmin / h + 1e-9)) - margin;
        const long fx1 = static_cast<long>(std::ceil(shape.xmax / h - 1e-9)) + margin;
        d.x0 = fx0 * h;
        d.nx = static_cast<int>(fx1 - fx0);
        if (dims == 2) {
            const long fy0 = static_cast<long>(std::floor(shape.ymin / h + 1e-9)) - margin;
            const long fy1 = static_cast<long>(std::ceil(shape.ymax / h - 1e-9)) + margin;
            d.y0 = fy0 * h;
            d.ny = static_cast<int>(fy1 - fy0);
        }
        if (static_cast<long>(d.nx) * d.ny > 4'000'000) fail(ErrorCode::InvalidArgument, "grid too large");
        d.mask.assign(d.size(), 0);
        for (int idx = 0; idx < d.size(); ++idx) d.mask[idx] = shape.contains(d.cx(idx), d.cy(idx)) ? 1 : 0;

        if (slit_width > 0) {
            // remove rows starting at the row just above the centre line,
            // from the centre to the outer edge
            double cx, cy;
            if (type == "disk_with_slit") {
                std::tie(cx, cy) = detail::pair_of(desc, "center");
            } else {
                const auto [ax, ay] = detail::pair_of(desc, "min");
                const auto [bx, by] = detail::pair_of(desc, "max");
                cx = 0.5 * (ax + bx);
                cy = 0.5 * (ay + by);
            }
            const int j0 = static_cast<int>(std::floor((cy - d.y0) / h + 1e-9));
            for (int j = j0; j < j0 + slit_width && j < d.ny; ++j)
                for (int i = 0; i < d.nx; ++i)
                    if (d.x0 + (i + 0.5) * h >= cx) d.mask[d.index(i, j)] = 0;
        }
        d.label = label;
        d.descriptor = desc;
        if (d.interior_cells().empty()) fail(ErrorCode::EmptyDomain, "descriptor rasterizes to no interior cell");
        return d;
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("bad domain descriptor: ") + e.what());
    }
}

// shorthand domains used by the CLI and the topology corpus
inline const std::vector<std::string>& named_domains()
{
    static const std::vector<std::string> names{"interval",  "disk",           "annulus",
                                                "rectangle", "l_shape",        "disk_with_slit",
                                                "rectangle_with_slit", "two_disks", "dumbbell"};
    return names;
}

inline json named_domain_descriptor(const std::string& name, double h)
{
    json d;
    if (name == "interval") d = {{"type", "interval"}, {"a", 0.0}, {"b", 1.0}};
    else if (name == "disk") d = {{"type", "disk"}, {"center", {0.0, 0.0}}, {"radius", 1.0}};
    else if (name == "annulus") d = {{"type", "annulus"}, {"center", {0.0, 0.0}}, {"r_inner", 0.5}, {"r_outer", 1.0}};
    else if (name == "rectangle") d = {{"type", "rectangle"}, {"min", {-1.0, -0.5}}, {"max", {1.0, 0.5}}};
    else if (name == "l_shape")
        d = {{"type", "difference"},
             {"base", {{"type", "rectangle"}, {"min", {-1.0, -1.0}}, {"max", {1.0, 1.0}}}},
             {"minus", {{"type", "rectangle"}, {"min", {0.0, 0.0}}, {"max", {2.0, 2.0}}}}};
    else if (name == "disk_with_slit")
        d = {{"type", "disk_with_slit"}, {"center", {0.0, 0.0}}, {"radius", 1.0}, {"slit_width", 1}};
    else if (name == "rectangle_with_slit")
        d = {{"type", "rectangle_with_slit"}, {"min", {-1.0, -0.5}}, {"max", {1.0, 0.5}}, {"slit_width", 1}};
    else if (name == "two_disks")
        d = {{"type", "union"},
             {"parts",
              {{{"type", "disk"}, {"center", {-1.0, 0.0}}, {"radius", 0.75}},
               {{"type", "disk"}, {"center", {1.0, 0.0}}, {"radius", 0.75}}}}};
    else if (name == "dumbbell")
        d = {{"type", "dumbbell"}, {"left", {-1.0, 0.0}}, {"right", {1.0, 0.0}}, {"radius", 0.6}, {"bar_width", 0.5}};
    else fail(ErrorCode::InvalidArgument, "unknown named domain '" + name + "'");
    d["h"] = h;
    return d;
}

// --------------------------------------------------------------- distances

namespace detail {

// Euclidean distance from every cell centre (where want(idx)) to the nearest
// seed centre: multi-source Dijkstra carrying the nearest seed, then an exact
// window scan bounded by the propagated distance.
inline std::vector<double> seed_distance(const GridDomain& d, const std::vector<int>& seeds,
                                         const std::function<bool(int)>& want)
{
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(d.size(), inf);
    std::vector<int> nearest(d.size(), -1);
    if (seeds.empty()) return dist;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (int s : seeds) {
        dist[s] = 0;
        nearest[s] = s;
        pq.push({0.0, s});
    }
    auto euclid = [&](int a, int b) { return std::hypot(d.cx(a) - d.cx(b), d.cy(a) - d.cy(b)); };
    while (!pq.empty()) {
        auto [dv, idx] = pq.top();
        pq.pop();
        if (dv > dist[idx]) continue;
        const int i = d.col(idx), j = d.row(idx);
        for (int dj = (d.dims == 2 ? -1 : 0); dj <= (d.dims == 2 ? 1 : 0); ++dj)
            for (int di = -1; di <= 1; ++di) {
                const int ii = i + di, jj = j + dj;
                if ((di == 0 && dj == 0) || ii < 0 || ii >= d.nx || jj < 0 || jj >= d.ny) continue;
                const int nb = d.index(ii, jj);
                const double cand = euclid(nb, nearest[idx]);
                if (cand < dist[nb]) {
                    dist[nb] = cand;
                    nearest[nb] = nearest[idx];
                    pq.push({cand, nb});
                }
            }
    }
    // exact correction
    std::vector<std::vector<int>> rows(d.ny);
    for (int s : seeds) rows[d.row(s)].push_back(d.col(s));
    for (auto& r : rows) std::sort(r.begin(), r.end());
    for (int idx = 0; idx < d.size(); ++idx) {
        if (!want(idx)) {
            dist[idx] = inf;
            continue;
        }
        const double bound = dist[idx];
        const int reach = static_cast<int>(std::ceil(bound / d.h)) + 1;
        const int i = d.col(idx), j = d.row(idx);
        double best = bound;
        for (int jj = std::max(0, j - reach); jj <= std::min(d.ny - 1, j + reach); ++jj) {
            const auto& r = rows[jj];
            auto it = std::lower_bound(r.begin(), r.end(), i - reach);
            for (; it != r.end() && *it <= i + reach; ++it) {
                const double dx = (*it - i) * d.h, dy = (jj - j) * d.h;
                best = std::min(best, std::sqrt(dx * dx + dy * dy));
            }
        }
        dist[idx] = best;
    }
    return dist;
}

} // namespace detail

struct DistanceField {
    std::vector<double> values;  // NaN outside the domain
    std::vector<int> boundary_cells;  // cells of the domain touching the complement

    double operator[](int idx) const { return values[idx]; }
    double max() const
    {
        double m = 0;
        for (double v : values)
            if (v == v) m = std::max(m, v);
        return m;
    }
};

// distance from each cell centre of the domain to the nearest boundary cell
// centre (where the Dirichlet data sits)
inline DistanceField distance_field(const GridDomain& d)
{
    DistanceField df;
    df.boundary_cells = d.boundary_cells();
    df.values = detail::seed_distance(d, df.boundary_cells, [&](int idx) { return d.inside(idx); });
    for (int idx = 0; idx < d.size(); ++idx)
        if (!d.inside(idx)) df.values[idx] = std::numeric_limits<double>::quiet_NaN();
    return df;
}

// distance from every cell centre to the nearest cell centre of the set
inline std::vector<double> distance_to_set(const GridDomain& d)
{
    auto v = detail::seed_distance(d, d.boundary_cells(), [](int) { return true; });
    for (int idx = 0; idx < d.size(); ++idx)
        if (d.inside(idx)) v[idx] = 0.0;
    return v;
}

// cells whose centre lies within distance < eps of a cell of the domain
inline GridDomain dilate(const GridDomain& d, double eps)
{
    if (!(eps >= 0)) fail(ErrorCode::InvalidArgument, "dilation radius must be nonnegative");
    const auto dist = distance_to_set(d);
    std::vector<std::uint8_t> m(d.size(), 0);
    for (int idx = 0; idx < d.size(); ++idx) {
        m[idx] = (d.inside(idx) || dist[idx] < eps - 1e-9 * d.h) ? 1 : 0;
        if (m[idx] && d.on_bbox_edge(idx)) fail(ErrorCode::ExceedsBBox, "dilation reaches the bounding box frame");
    }
    return d.with_mask(std::move(m), d.label + "_dilated");
}

// cells with distance to the boundary > depth
inline GridDomain erode(const GridDomain& d, double depth)
{
    const auto df = distance_field(d);
    std::vector<std::uint8_t> m(d.size(), 0);
    for (int idx = 0; idx < d.size(); ++idx)
        m[idx] = (d.inside(idx) && df.values[idx] > depth + 1e-9 * d.h) ? 1 : 0;
    GridDomain e = d.with_mask(std::move(m), d.label + "_eroded");
    if (e.interior_cells().empty()) fail(ErrorCode::EmptyDomain, "erosion leaves no interior");
    return e;
}

// n-th member (1..levels) of the interior exhaustion: distance > (levels - n) h
inline GridDomain exhaustion_domain(const GridDomain& d, int levels, int n)
{
    if (levels < 1 || n < 1 || n > levels) fail(ErrorCode::InvalidArgument, "exhaustion level out of range");
    return erode(d, (levels - n) * d.h);
}

// ---------------------------------------------------------------- topology

// closure at grid resolution: outside cells squeezed between two cells of
// the set on opposite faces are added (a one-cell gap heals)
inline GridDomain closure(const GridDomain& d)
{
    std::vector<std::uint8_t> m = d.mask;
    for (int idx = 0; idx < d.size(); ++idx) {
        if (d.inside(idx)) continue;
        const auto nb = d.neighbors(idx);
        const bool lr = d.inside(nb[0]) && d.inside(nb[1]);
        const bool ud = d.dims == 2 && d.inside(nb[2]) && d.inside(nb[3]);
        if (lr || ud) m[idx] = 1;
    }
    return d.with_mask(std::move(m), d.label + "_closure");
}

struct TopoReport {
    bool boundaries_agree = false;        // (i)
    bool exterior_adjacent = false;       // (ii)
    bool exterior_in_unit_ball = false;   // (iii)
    bool dilation_distance_vanishes = false;  // (iv)
    bool regular_open = false;            // (v)

    std::array<bool, 5> all() const
    {
        return {boundaries_agree, exterior_adjacent, exterior_in_unit_ball, dilation_distance_vanishes, regular_open};
    }
    bool unanimous() const
    {
        const auto a = all();
        return std::all_of(a.begin(), a.end(), [&](bool b) { return b == a[0]; });
    }
    bool regular() const
    {
        const auto a = all();
        return std::all_of(a.begin(), a.end(), [](bool b) { return b; });
    }
    json to_json() const
    {
        return {{"i_boundary_equals_exterior_boundary", boundaries_agree},
                {"ii_exterior_face_adjacent", exterior_adjacent},
                {"iii_exterior_in_unit_ball", exterior_in_unit_ball},
                {"iv_dilation_distance_vanishes", dilation_distance_vanishes},
                {"v_interior_of_closure", regular_open},
                {"unanimous", unanimous()},
                {"verdict", unanimous() ? (regular() ? "all_true" : "all_false") : "disagree"}};
    }
};

inline TopoReport topo_check(const GridDomain& d)
{
    TopoReport r;
    const GridDomain cl = closure(d);
    auto in_ext = [&](int idx) { return idx >= 0 && !cl.inside(idx); };
    const auto bcells = d.boundary_cells();

    // (i) faces between the set and its complement == faces between the
    // closure's exterior and the closure
    {
        bool same = true;
        for (int idx = 0; idx < d.size() && same; ++idx) {
            const auto nb = d.neighbors(idx);
            for (int k = 0; k < d.neighbor_count(); ++k) {
                if (nb[k] < 0) continue;
                const bool face_omega = d.inside(idx) != d.inside(nb[k]);
                const bool face_ext = in_ext(idx) != in_ext(nb[k]);
                if (face_omega != face_ext) {
                    same = false;
                    break;
                }
            }
        }
        r.boundaries_agree = same;
    }
    // (ii) every boundary cell touches the closure's exterior through a face
    r.exterior_adjacent = std::all_of(bcells.begin(), bcells.end(), [&](int idx) {
        const auto nb = d.neighbors(idx);
        for (int k = 0; k < d.neighbor_count(); ++k)
            if (in_ext(nb[k])) return true;
        return false;
    });
    // (iii) the 3x3 block around every boundary cell meets the exterior
    r.exterior_in_unit_ball = std::all_of(bcells.begin(), bcells.end(), [&](int idx) {
        const int i = d.col(idx), j = d.row(idx);
        for (int dj = (d.dims == 2 ? -1 : 0); dj <= (d.dims == 2 ? 1 : 0); ++dj)
            for (int di = -1; di <= 1; ++di) {
                const int ii = i + di, jj = j + dj;
                if (ii < 0 || ii >= d.nx || jj < 0 || jj >= d.ny) continue;
                if (in_ext(d.index(ii, jj))) return true;
            }
        return false;
    });
    // (iv) dist(x, complement of the eps-dilation of the closure) shrinks to
    // one cell (diagonal included) as eps goes 4h, 2h, h
    {
        bool ok = true;
        std::vector<std::vector<double>> dist_by_eps;
        for (double m : {4.0, 2.0, 1.0}) {
            GridDomain grown = dilate(cl, m * d.h);
            std::vector<int> outside;
            for (int idx = 0; idx < d.size(); ++idx)
                if (!grown.inside(idx)) outside.push_back(idx);
            dist_by_eps.push_back(detail::seed_distance(d, outside, [](int) { return true; }));
        }
        for (int idx : bcells) {
            const double d4 = dist_by_eps[0][idx], d2 = dist_by_eps[1][idx], d1 = dist_by_eps[2][idx];
            if (!(d4 >= d2 && d2 >= d1)) ok = false;
            if (!(d1 <= std::sqrt(2.0) * d.h * (1 + 1e-9))) ok = false;
        }
        r.dilation_distance_vanishes = ok;
    }
    // (v) the interior of the closure (cells whose faces all stay in the
    // closure) lies in the set
    {
        bool ok = true;
        for (int idx = 0; idx < d.size() && ok; ++idx) {
            if (!cl.inside(idx) || d.inside(idx)) continue;
            const auto nb = d.neighbors(idx);
            bool all_in = true;
            for (int k = 0; k < d.neighbor_count(); ++k) all_in = all_in && cl.inside(nb[k]);
            if (all_in) ok = false;
        }
        r.regular_open = ok;
    }
    return r;
}

struct SpaceTimeDomain {
    GridDomain space;
    double T = 1.0;
    double dt = 0.0;

    SpaceTimeDomain() = default;
    SpaceTimeDomain(GridDomain s, double T_, double dt_) : space(std::move(s)), T(T_), dt(dt_)
    {
        if (!(dt > 0)) fail(ErrorCode::InvalidArgument, "dt must be positive");
        if (!(T >= dt)) fail(ErrorCode::InvalidArgument, "T must be at least dt");
    }
    int steps() const { return static_cast<int>(std::floor(T / dt + 1e-9)); }
    double time(int m) const { return m * dt; }
};

} // namespace blowup
