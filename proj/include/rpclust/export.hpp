#pragma once

#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpclust/cluster.hpp"
#include "rpclust/ingest.hpp"

namespace rpclust {

/// Fixed display palette; community c gets entry c modulo its size.
std::string_view community_color(std::size_t community) noexcept;

/// GeoJSON FeatureCollection with one Point per COL row of the partition, in
/// partition order, carrying {city, community, color}. Throws UnknownCity
/// listing every city the gazetteer cannot resolve.
nlohmann::json partition_geojson(const std::vector<PartitionRow>& rows, const Gazetteer& gz);

}  // namespace rpclust
