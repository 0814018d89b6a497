#include "rpclust/export.hpp"

#include <array>

#include "rpclust/error.hpp"

namespace rpclust {

namespace {

constexpr std::array<std::string_view, 12> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};

}  // namespace

std::string_view community_color(std::size_t community) noexcept {
  return kPalette[community % kPalette.size()];
}

nlohmann::json partition_geojson(const std::vector<PartitionRow>& rows, const Gazetteer& gz) {
  nlohmann::json features = nlohmann::json::array();
  std::string missing;
  for (const auto& row : rows) {
    if (row.tag != PartTag::Col) continue;
    const auto* entry = gz.find(row.label);
    if (!entry) {
      missing += (missing.empty() ? "'" : ", '") + row.label + "'";
      continue;
    }
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "Point"}, {"coordinates", {entry->longitude, entry->latitude}}}},
                        {"properties",
                         {{"city", row.label},
                          {"community", row.community},
                          {"color", std::string(community_color(row.community))}}}});
  }
  if (!missing.empty()) throw Error(ErrorCode::UnknownCity, "not in gazetteer: " + missing);
  return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace rpclust
