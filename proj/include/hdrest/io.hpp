#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hdrest/density.hpp"
#include "hdrest/geometry.hpp"
#include "hdrest/hdr.hpp"
#include "hdrest/point.hpp"

namespace hdrest::io {

using nlohmann::json;

/// Splits one CSV record on commas; double-quoted fields may contain commas
/// and "" escapes. Surrounding whitespace is trimmed from unquoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

/// Point sample from CSV. With a header, columns named x and y are used (or
/// the first two columns); without one every row must hold two numbers.
PointSet read_points_csv(std::istream& in);
PointSet read_points_csv_file(const std::string& path);
void write_points_csv(std::ostream& out, std::span<const Point> points);

/// Hull document: radius (null when infinite), deduplicated sites, and one
/// entry per component with its boundary loops. Arc pieces carry
/// {cx, cy, r, theta_start, theta_end, orientation}, segments {x1, y1, x2, y2};
/// angles in radians, counter-clockwise positive, orientation "cw" or "ccw".
json hull_to_json(const geometry::RConvexHull& hull);
/// Rebuilds the hull from its sites and radius.
std::shared_ptr<const geometry::RConvexHull> hull_from_json(const json& j);

/// Grid spec, bandwidth and values; values[j * nx + i] is node (x_i, y_j).
json field_to_json(const density::DensityField& f);
density::DensityField field_from_json(const json& j);

/// Binary field layout, little-endian: "HDRF", u32 version (1), f64 xmin,
/// xmax, ymin, ymax, u64 nx, ny, f64 h11, h12, h22, then nx * ny f64 values
/// in the same row-major order as the JSON form.
void write_field_binary(std::ostream& out, const density::DensityField& f);
density::DensityField read_field_binary(std::istream& in);

json region_to_json(const hdr::Region& region);
/// Accepts an estimate document, a region document, a hull document, or
/// GeoJSON (FeatureCollection, Feature, Polygon or MultiPolygon).
hdr::Region region_from_json(const json& j);
hdr::Region read_region_file(const std::string& path);

/// Thresholds, tau_bar trace, coverage, r0, D_n diagnostic and the region.
json estimate_to_json(const hdr::HdrEstimate& e);

/// Polygons of a region, each an outer ring followed by its holes. Rings are
/// open (first vertex not repeated); outer rings run counter-clockwise. Arcs
/// are flattened so every chord's sagitta is at most `arc_tolerance`. Hull
/// vertices that fall in a part of the kept complex cut away by the disks are
/// dropped, so each emitted vertex lies in the region.
using Ring = std::vector<Point>;
using Polygon = std::vector<Ring>;
std::vector<Polygon> region_polygons(const hdr::Region& region, double arc_tolerance);

/// Points along an arc, both ends included, with sagitta <= tolerance.
std::vector<Point> flatten_arc(const geometry::Arc& arc, double tolerance);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace hdrest::io
