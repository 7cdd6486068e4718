#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bflab/bergman.hpp"
#include "bflab/calabi.hpp"
#include "bflab/flows.hpp"

namespace bflab::io {

using nlohmann::json;

/// {dim, re, im} with row-major entries. Doubles are written in shortest
/// round-trip form, so a read after a write is bit-exact.
json matrix_to_json(const herm::CMatrix& m);
herm::CMatrix matrix_from_json(const json& j);

json point_to_json(const bergman::BergmanPoint& b);
bergman::BergmanPoint point_from_json(const json& j);

/// {grid_spec: {n_theta, n_phi}, rel_potential: [...]}.
json metric_to_json(const manifold::KahlerData& m);
manifold::KahlerData metric_from_json(const json& j);

/// {grid_spec: {n_nodes}, rel_potential: [...]}.
json profile_to_json(const manifold::SymmetricProfile& p);
manifold::SymmetricProfile profile_from_json(const json& j);

/// Writes dir/trace.json plus dir/points/NNNNNN.json, one per time.
void write_trace(const std::filesystem::path& dir, const flows::FlowTrace& trace, const json& metadata = {});
flows::FlowTrace read_trace(const std::filesystem::path& dir, json* metadata = nullptr);

/// %.17g.
std::string format_double(double v);

/// Writes to a temporary sibling and renames over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace bflab::io
