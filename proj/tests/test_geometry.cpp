#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "blowup/geometry.hpp"

using namespace blowup;

namespace {

GridDomain named(const std::string& name, double h = 1.0 / 32) { return make_domain(named_domain_descriptor(name, h)); }

int cell_at(const GridDomain& d, double x, double y)
{
    const int i = static_cast<int>(std::floor((x - d.x0) / d.h));
    const int j = d.dims == 1 ? 0 : static_cast<int>(std::floor((y - d.y0) / d.h));
    return d.index(i, j);
}

bool subset(const GridDomain& a, const GridDomain& b)
{
    for (int idx = 0; idx < a.size(); ++idx)
        if (a.inside(idx) && !b.inside(idx)) return false;
    return true;
}

} // namespace

TEST(MakeDomain, IntervalCellCount)
{
    auto d = make_domain({{"type", "interval"}, {"a", 0.0}, {"b", 1.0}, {"h", 1.0 / 128}});
    EXPECT_EQ(d.dims, 1);
    EXPECT_EQ(d.count(), 128);
    EXPECT_EQ(d.boundary_cells().size(), 2u);
}

TEST(MakeDomain, DiskArea)
{
    auto d = named("disk");
    const double area = d.count() * d.h * d.h;
    EXPECT_NEAR(area, std::numbers::pi, 0.05 * std::numbers::pi);
    // frame stays empty
    for (int idx = 0; idx < d.size(); ++idx)
        if (d.on_bbox_edge(idx)) {
            EXPECT_FALSE(d.inside(idx));
        }
}

TEST(MakeDomain, SlitRemovesOneRadialLine)
{
    auto disk = named("disk");
    auto slit = named("disk_with_slit");
    ASSERT_TRUE(disk.same_grid(slit));
    int removed = 0;
    for (int idx = 0; idx < disk.size(); ++idx) {
        ASSERT_FALSE(slit.inside(idx) && !disk.inside(idx));
        if (disk.inside(idx) && !slit.inside(idx)) {
            ++removed;
            EXPECT_GE(disk.cx(idx), 0.0);
            EXPECT_NEAR(disk.cy(idx), disk.h / 2, 1e-12);
        }
    }
    EXPECT_EQ(removed, 32);
}

TEST(MakeDomain, WideSlitRelabelledZeroSlitIsDisk)
{
    auto desc = named_domain_descriptor("disk_with_slit", 1.0 / 32);
    desc["slit_width"] = 2;
    EXPECT_EQ(make_domain(desc).label, "disk_with_cut");
    desc["slit_width"] = 0;
    EXPECT_EQ(make_domain(desc).mask, named("disk").mask);
}

TEST(MakeDomain, Errors)
{
    try {
        make_domain({{"type", "disk"}, {"center", {0, 0}}, {"radius", 0.01}, {"h", 0.1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyDomain);
    }
    EXPECT_THROW(make_domain({{"type", "hexagon"}, {"h", 0.1}}), Error);
    EXPECT_THROW(make_domain({{"type", "disk"}, {"h", 0.1}}), Error);
}

TEST(Distance, Examples)
{
    auto iv = make_domain({{"type", "interval"}, {"a", 0.0}, {"b", 1.0}, {"h", 1.0 / 128}});
    auto di = distance_field(iv);
    EXPECT_NEAR(di[cell_at(iv, 0.5 - 1e-9, 0)], 0.5 - iv.h / 2, iv.h);

    auto disk = named("disk");
    auto dd = distance_field(disk);
    // the centre cell sits h/sqrt2 off the origin on an even grid
    const int c = cell_at(disk, 0.01, 0.01);
    EXPECT_NEAR(dd[c], 1.0 - std::hypot(disk.cx(c), disk.cy(c)), disk.h);
    EXPECT_TRUE(std::isnan(dd[0]));

    auto slit = named("disk_with_slit");
    auto ds = distance_field(slit);
    EXPECT_LE(ds[cell_at(slit, 0.5, 1.5 * slit.h)], slit.h + 1e-12);
    EXPECT_LE(ds[cell_at(slit, 0.5, -0.5 * slit.h)], slit.h + 1e-12);
}

TEST(Distance, MatchesBruteForce)
{
    for (const char* name : {"l_shape", "annulus", "dumbbell"}) {
        auto d = named(name, 1.0 / 16);
        auto df = distance_field(d);
        for (int idx = 0; idx < d.size(); ++idx) {
            if (!d.inside(idx)) continue;
            double best = 1e300;
            for (int b : df.boundary_cells) best = std::min(best, std::hypot(d.cx(idx) - d.cx(b), d.cy(idx) - d.cy(b)));
            ASSERT_DOUBLE_EQ(df[idx], best) << name;
        }
    }
}

TEST(Distance, ZeroExactlyOnBoundaryAndEikonal)
{
    auto d = named("annulus");
    auto df = distance_field(d);
    for (int idx = 0; idx < d.size(); ++idx) {
        if (!d.inside(idx)) continue;
        EXPECT_EQ(df[idx] == 0.0, d.is_boundary(idx));
        const auto nb = d.neighbors(idx);
        for (int k = 0; k < 4; ++k) {
            if (d.inside(nb[k])) {
                EXPECT_LE(std::abs(df[nb[k]] - df[idx]), d.h * (1 + 1e-12));
            }
        }
    }
}

TEST(Distance, DiskRadialSymmetry)
{
    auto d = named("disk");
    auto df = distance_field(d);
    for (int idx = 0; idx < d.size(); ++idx) {
        if (!d.inside(idx)) continue;
        const double r = std::hypot(d.cx(idx), d.cy(idx));
        EXPECT_NEAR(df[idx], 1.0 - r, 1.5 * d.h);
        // mirror images carry the same value
        EXPECT_DOUBLE_EQ(df[idx], df[cell_at(d, -d.cx(idx), d.cy(idx))]);
        EXPECT_DOUBLE_EQ(df[idx], df[cell_at(d, d.cy(idx), d.cx(idx))]);
    }
}

TEST(Dilate, DiskOracle)
{
    auto d = make_domain({{"type", "disk"}, {"center", {0, 0}}, {"radius", 1.0}, {"h", 1.0 / 32}, {"margin", 14}});
    auto big = dilate(d, 0.25);
    auto ref = make_domain({{"type", "disk"}, {"center", {0, 0}}, {"radius", 1.25}, {"h", 1.0 / 32}, {"margin", 6}});
    ASSERT_TRUE(big.same_grid(ref));
    for (int idx = 0; idx < big.size(); ++idx) {
        if (big.inside(idx) != ref.inside(idx)) {
            EXPECT_NEAR(std::hypot(big.cx(idx), big.cy(idx)), 1.25, big.h);
        }
    }
}

TEST(Dilate, IdentityNestingAndFrame)
{
    auto d = named("l_shape");
    EXPECT_EQ(dilate(d, 0).mask, d.mask);
    EXPECT_EQ(dilate(d, d.h).mask, d.mask);
    int last = d.count();
    GridDomain prev = d;
    for (int k = 1; k <= 12; ++k) {
        auto g = dilate(d, 0.5 * k * d.h);
        EXPECT_TRUE(subset(prev, g));
        EXPECT_GE(g.count(), last);
        last = g.count();
        prev = g;
    }
    try {
        dilate(d, 20 * d.h);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ExceedsBBox);
    }
}

TEST(Dilate, SlitClosesAtTwoCells)
{
    auto slit = named("disk_with_slit");
    auto disk = named("disk");
    EXPECT_EQ(dilate(slit, 2 * slit.h).mask, dilate(disk, 2 * disk.h).mask);
    EXPECT_NE(dilate(slit, slit.h).mask, dilate(disk, disk.h).mask);
}

TEST(Exhaustion, IncreasingToDomain)
{
    auto d = named("disk");
    GridDomain prev = exhaustion_domain(d, 4, 1);
    for (int n = 2; n <= 4; ++n) {
        auto e = exhaustion_domain(d, 4, n);
        EXPECT_TRUE(subset(prev, e));
        EXPECT_GT(e.count(), prev.count());
        prev = e;
    }
    EXPECT_TRUE(subset(prev, d));
    EXPECT_EQ(prev.count(), d.count() - static_cast<int>(d.boundary_cells().size()));
    EXPECT_THROW(exhaustion_domain(d, 4, 5), Error);
}

TEST(Topology, CorpusUnanimous)
{
    for (const auto& name : named_domains()) {
        auto d = named(name);
        auto r = topo_check(d);
        EXPECT_TRUE(r.unanimous()) << name << " " << r.to_json().dump();
        const bool slit = name.find("slit") != std::string::npos;
        EXPECT_EQ(r.regular(), !slit) << name;
    }
}

TEST(Topology, CorpusAtOtherResolutions)
{
    for (double h : {1.0 / 16, 1.0 / 40, 1.0 / 64}) {
        for (const auto& name : named_domains()) {
            auto r = topo_check(named(name, h));
            EXPECT_TRUE(r.unanimous()) << name << " h=" << h;
        }
    }
}

TEST(Topology, SlitFailsFifthCriterion)
{
    auto r = topo_check(named("disk_with_slit"));
    EXPECT_FALSE(r.regular_open);
    EXPECT_EQ(r.to_json()["verdict"], "all_false");
    // the closure heals exactly the slit
    auto cl = closure(named("disk_with_slit"));
    EXPECT_EQ(cl.mask, named("disk").mask);
}

TEST(Export, PgmAndCsv)
{
    auto d = named("disk", 1.0 / 8);
    std::ostringstream pgm, csv;
    d.write_pgm(pgm);
    d.write_centers_csv(csv);
    std::istringstream in(pgm.str());
    std::string magic;
    int w, hgt, maxv;
    in >> magic >> w >> hgt >> maxv;
    EXPECT_EQ(magic, "P2");
    EXPECT_EQ(w, d.nx);
    EXPECT_EQ(hgt, d.ny);
    int lines = 0;
    std::istringstream cin_(csv.str());
    for (std::string line; std::getline(cin_, line);) ++lines;
    EXPECT_EQ(lines, d.count() + 1);
}

TEST(SpaceTime, Invariants)
{
    auto d = named("interval", 1.0 / 16);
    SpaceTimeDomain st(d, 1.0, 1.0 / 16);
    EXPECT_EQ(st.steps(), 16);
    EXPECT_THROW(SpaceTimeDomain(d, 0.01, 0.1), Error);
    EXPECT_THROW(SpaceTimeDomain(d, 1.0, 0.0), Error);
}
