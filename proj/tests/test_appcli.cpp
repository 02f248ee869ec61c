#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hdrest/appcli.hpp"
#include "hdrest/errors.hpp"
#include "hdrest/io.hpp"

using namespace hdrest;
using namespace hdrest::app;

namespace {

IngestOptions exact() {
    IngestOptions o;
    o.jitter_sigma = 0;
    o.n_min = 1;
    return o;
}

IngestResult ingest(const std::string& text, const IngestOptions& o) {
    std::istringstream in(text);
    return ingest_csv(in, o);
}

}  // namespace

TEST_CASE("dates parse and print as ISO days") {
    CHECK(format_date(parse_date("2020-03-02")) == "2020-03-02");
    CHECK(format_date(parse_date("2020/2/29")) == "2020-02-29");
    CHECK((parse_date("2020-03-09") - parse_date("2020-03-02")).count() == 7);
    CHECK_THROWS_AS(parse_date("2021-02-29"), FormatError);
    CHECK_THROWS_AS(parse_date("03/02/2020"), FormatError);
    CHECK_THROWS_AS(parse_date("2020-03-02x"), FormatError);
}

TEST_CASE("one record with count 3 and no jitter gives 3 identical points") {
    const auto r = ingest("date,longitude,latitude,count\n2020-03-02,-3.7,40.4,3\n", exact());
    REQUIRE(r.weeks.size() == 1);
    CHECK(r.weeks[0].points == PointSet{{-3.7, 40.4}, {-3.7, 40.4}, {-3.7, 40.4}});
    CHECK(r.weeks[0].cases == 3);
    CHECK(r.errors.empty());
}

TEST_CASE("invalid rows are reported with line numbers") {
    const auto r = ingest("date,longitude,latitude,count\n"
                          "2020-03-02,1,91,1\n"
                          "2020-03-02,181,0,1\n"
                          "2020-03-02,1,2,0\n"
                          "2020-03-02,1,2,x\n"
                          "2020-13-02,1,2,1\n"
                          "2020-03-02,1,2\n"
                          "\n"
                          "2020-03-03,1,2,2\n",
                          exact());
    REQUIRE(r.errors.size() == 6);
    CHECK(r.errors[0].row == 2);
    CHECK(r.errors[0].message.find("latitude") != std::string::npos);
    CHECK(r.errors[1].row == 3);
    CHECK(r.errors[2].row == 4);
    CHECK(r.errors[5].row == 7);
    CHECK(r.rows == 7);
    CHECK(r.accepted == 1);
    CHECK(r.weeks[0].points.size() == 2);
}

TEST_CASE("a bad header aborts ingestion") {
    CHECK_THROWS_AS(ingest("date,lon,latitude,count\n2020-03-02,1,2,1\n", exact()), MalformedHeader);
    CHECK_THROWS_AS(ingest("", exact()), MalformedHeader);
    CHECK_THROWS_AS(ingest("\"date,longitude\n", exact()), MalformedHeader);
    auto o = exact();
    o.schema = {"lng", "lat", "day", "", false};
    const auto r = ingest("day,lat,lng\n2020-03-02,40,-3\n2020-03-02,41,-4\n", o);
    CHECK(r.weeks[0].points == PointSet{{-3, 40}, {-4, 41}});
}

TEST_CASE("cumulative series are differenced per location") {
    auto o = exact();
    o.schema.cumulative = true;
    const auto r = ingest("date,longitude,latitude,count\n"
                          "2020-03-04,1,1,8\n"
                          "2020-03-02,1,1,5\n"
                          "2020-03-05,1,1,8\n"
                          "2020-03-06,1,1,20\n"
                          "2020-03-02,2,2,1\n",
                          o);
    CHECK(r.errors.empty());
    REQUIRE(r.weeks.size() == 1);
    CHECK(r.weeks[0].cases == 5 + 3 + 0 + 12 + 1);
    CHECK(r.weeks[0].points.size() == 21);

    const auto bad = ingest("date,longitude,latitude,count\n2020-03-02,1,1,5\n2020-03-03,1,1,4\n", o);
    REQUIRE(bad.errors.size() == 1);
    CHECK(bad.errors[0].row == 3);
}

TEST_CASE("weeks are anchored at the start date and conserve cases") {
    std::stringstream csv;
    write_two_city_csv(csv, 400, 3, 5);
    IngestOptions o;
    o.seed = 9;
    const auto text = csv.str();
    const auto r = ingest(text, o);
    REQUIRE(r.weeks.size() == 3);
    for (const auto& w : r.weeks) {
        CHECK(w.points.size() == w.cases);
        CHECK(w.cases == 400);
        CHECK((w.last - w.first).count() == 6);
    }
    CHECK(format_date(r.start) == "2020-03-02");
    const auto again = ingest(text, o);
    CHECK(again.weeks[1].points == r.weeks[1].points);
    o.seed = 10;
    CHECK_FALSE(ingest(text, o).weeks[1].points == r.weeks[1].points);

    o.start = parse_date("2020-03-05");
    const auto shifted = ingest(text, o);
    CHECK_FALSE(shifted.errors.empty());  // records before the start date
    std::uint64_t total = 0;
    for (const auto& w : shifted.weeks) total += w.cases;
    CHECK(total < 1200);

    o.start.reset();
    o.n_min = 500;
    for (const auto& w : ingest(text, o).weeks) CHECK(w.unreliable);

    o.n_min = 50;
    o.equirectangular = true;
    const auto eq = ingest(text, o);
    CHECK(eq.x_scale == doctest::Approx(std::cos(40.4 * M_PI / 180)).epsilon(0.01));
}

TEST_CASE("GeoJSON: square polygon, two-component multipolygon, sagitta bound") {
    hdr::HdrEstimate sq;
    sq.method = "hybrid";
    sq.tau = 0.5;
    sq.region = hdr::Region(std::make_shared<const geometry::RConvexHull>(
        PointSet{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, geometry::kInfinity));
    auto doc = emit_geojson(sq, 1e-3, 4);
    const auto& f = doc["features"][0];
    CHECK(doc["type"] == "FeatureCollection");
    CHECK(f["geometry"]["type"] == "Polygon");
    CHECK(f["geometry"]["coordinates"][0].size() == 5);
    CHECK(f["properties"]["week"] == 4);
    CHECK(f["properties"]["components"] == 1);

    // two circles of points; r between their spacing and their gap
    PointSet pts;
    for (int k = 0; k < 40; ++k) {
        const double a = 2 * M_PI * k / 40;
        pts.push_back({std::cos(a), std::sin(a)});
        pts.push_back({5 + std::cos(a), std::sin(a)});
    }
    hdr::HdrEstimate two;
    two.region = hdr::Region(std::make_shared<const geometry::RConvexHull>(pts, 1.5));
    REQUIRE(two.component_count() == 2);
    const auto d2 = emit_geojson(two, 1e-3);
    CHECK(d2["features"][0]["geometry"]["type"] == "MultiPolygon");
    CHECK(d2["features"][0]["geometry"]["coordinates"].size() == 2);

    // polygon vertices pass the source membership test
    for (const auto& poly : d2["features"][0]["geometry"]["coordinates"])
        for (const auto& ring : poly)
            for (const auto& v : ring) CHECK(two.region.contains({v[0].get<double>(), v[1].get<double>()}));

    // arcs of a large-radius hull: chords stay within the tolerance of the region
    hdr::HdrEstimate circ;
    circ.region = hdr::Region(std::make_shared<const geometry::RConvexHull>(
        PointSet{{0, 0}, {1, 0}, {0.5, 0.9}}, 2.0));
    const auto polys = io::region_polygons(circ.region, 1e-3);
    REQUIRE(polys.size() == 1);
    const auto& ring = polys[0][0];
    CHECK(ring.size() >= 20);
    const auto fine = circ.region.boundary_sample(1e-5);
    for (std::size_t i = 0; i < ring.size(); ++i) {
        CHECK(circ.region.contains(ring[i]));
        const Point mid = 0.5 * (ring[i] + ring[(i + 1) % ring.size()]);
        double best = 1e9;
        for (const Point& b : fine) best = std::min(best, dist(mid, b));
        CHECK(best <= 1e-3 + 1e-5);
    }

    // a far-scaled region is unscaled on output
    const auto scaled = emit_geojson(sq, 1e-3, {}, 0.5);
    CHECK(scaled["features"][0]["geometry"]["coordinates"][0][1][0] == doctest::Approx(2.0));
}

TEST_CASE("the pipeline finds both cities every week and writes its artifacts") {
    std::stringstream csv;
    write_two_city_csv(csv, 800, 2, 3);
    IngestOptions o;
    o.seed = 4;
    auto data = ingest(csv.str() + "2020-03-20,-3.7,40.4,1\n", o);  // a lone week-3 case
    REQUIRE(data.weeks.size() == 3);
    CHECK(data.weeks[2].unreliable);

    PipelineConfig cfg;
    cfg.taus = {0.8};
    cfg.B = 40;
    cfg.seed = 6;
    const auto dir = std::filesystem::temp_directory_path() / "hdrest_pipeline_test";
    std::filesystem::remove_all(dir);
    cfg.output_dir = dir.string();
    const auto res = run_pipeline(data, cfg);
    REQUIRE(res.rows.size() == 6);
    for (const auto& r : res.rows) {
        INFO(r.week << " " << r.method << " " << r.note);
        if (r.week == 2) {
            CHECK(r.status == "skipped");
        } else {
            CHECK(r.components == 2);
            if (r.method == "hybrid") CHECK(r.coverage >= 0.2);
        }
    }
    for (const auto& f : res.files) CHECK(std::filesystem::exists(dir / f));
    CHECK(std::filesystem::exists(dir / "week00_hybrid_tau0.8.geojson"));
    const auto gj = io::read_json_file((dir / "week01_plugin_tau0.8.geojson").string());
    CHECK(gj["features"][0]["geometry"]["type"] == "MultiPolygon");
    CHECK(io::region_from_json(gj).component_count() == 2);
    const auto man = io::read_json_file((dir / "manifest.json").string());
    CHECK(man["ingest"]["jitter_sigma_degrees"] == 0.01);
    CHECK(res.component_table().find("week,first,last,n,hybrid_tau0.8,plugin_tau0.8") == 0);

    cfg.output_dir.clear();
    const auto again = run_pipeline(data, cfg);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        CHECK(again.rows[i].components == res.rows[i].components);
        if (std::isfinite(res.rows[i].coverage)) CHECK(again.rows[i].coverage == res.rows[i].coverage);
    }
    std::filesystem::remove_all(dir);
}
