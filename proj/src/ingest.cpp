#include "rpclust/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rpclust/csv.hpp"
#include "rpclust/error.hpp"

namespace rpclust {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedRecord, what);
}

void check_coordinates(double lat, double lon) {
  if (lat < -90.0 || lat > 90.0)
    malformed("latitude " + std::to_string(lat) + " outside [-90, 90]");
  if (lon < -180.0 || lon > 180.0)
    malformed("longitude " + std::to_string(lon) + " outside [-180, 180]");
}

double require_double(std::string_view field, const char* name) {
  auto v = parse_double(field);
  if (!v) malformed(std::string("field '") + name + "' is not a number: '" + std::string(field) + "'");
  return *v;
}

RawRecord parse_json_record(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed("JSON record is not an object");
  RawRecord r;
  auto text_field = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) malformed(std::string("missing field '") + key + "'");
    return j[key].get<std::string>();
  };
  r.timestamp = text_field("timestamp");
  r.user_id = text_field("user_id");
  r.text = text_field("text");
  if (j.contains("coordinates")) {
    const auto& c = j["coordinates"];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      malformed("field 'coordinates' must be [lat, lon]");
    r.latitude = c[0].get<double>();
    r.longitude = c[1].get<double>();
  } else if (j.contains("lat") && j.contains("lon") && j["lat"].is_number() &&
             j["lon"].is_number()) {
    r.latitude = j["lat"].get<double>();
    r.longitude = j["lon"].get<double>();
  } else {
    malformed("missing coordinates");
  }
  return r;
}

RawRecord parse_csv_record(std::string_view line) {
  csv::Row row;
  try {
    row = csv::parse_line(line);
  } catch (const Error& e) {
    malformed(e.what());
  }
  RawRecord r;
  if (row.size() == 5) {
    r.latitude = require_double(row[3], "lat");
    r.longitude = require_double(row[4], "lon");
  } else if (row.size() == 4) {
    std::string_view pos = trim(row[3]);
    if (pos.size() < 2 || pos.front() != '[' || pos.back() != ']')
      malformed("field 'coordinates' must look like [lat, lon]");
    pos = pos.substr(1, pos.size() - 2);
    const auto comma = pos.find(',');
    if (comma == std::string_view::npos) malformed("field 'coordinates' must look like [lat, lon]");
    r.latitude = require_double(pos.substr(0, comma), "lat");
    r.longitude = require_double(pos.substr(comma + 1), "lon");
  } else if (row.size() == 3) {
    malformed("missing coordinates");
  } else {
    malformed("expected 4 or 5 CSV fields, got " + std::to_string(row.size()));
  }
  r.timestamp = std::string(trim(row[0]));
  r.user_id = std::string(trim(row[1]));
  r.text = row[2];
  return r;
}

const std::unordered_set<std::string> kDeterminers = {"the", "a",  "an",   "some",  "my",
                                                      "our", "this", "that", "these", "those"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string clean_object(std::string_view phrase) {
  phrase = trim(phrase);
  for (;;) {
    const auto sp = phrase.find_first_of(" \t");
    if (sp == std::string_view::npos || !kDeterminers.count(lower(phrase.substr(0, sp)))) break;
    phrase = trim(phrase.substr(sp));
  }
  while (!phrase.empty() && std::ispunct(static_cast<unsigned char>(phrase.back())))
    phrase.remove_suffix(1);
  return std::string(trim(phrase));
}

}  // namespace

RawRecord parse_record(std::string_view line) {
  line = trim(line);
  if (line.empty()) malformed("empty record");
  RawRecord r = line.front() == '{' ? parse_json_record(line) : parse_csv_record(line);
  if (r.text.empty()) malformed("field 'text' is empty");
  check_coordinates(r.latitude, r.longitude);
  return r;
}

std::optional<std::string> extract_place(std::string_view text) {
  for (std::size_t at = text.find('@'); at != std::string_view::npos; at = text.find('@', at + 1)) {
    if (at + 1 >= text.size() || !is_space(text[at + 1])) continue;
    std::string_view venue = text.substr(at + 1);
    if (auto close = venue.find(')'); close != std::string_view::npos) venue = venue.substr(0, close);
    if (auto with = venue.find(" w/"); with != std::string_view::npos) venue = venue.substr(0, with);
    venue = trim(venue);
    while (!venue.empty() && static_cast<unsigned char>(venue.front()) < 0x80 &&
           !std::isalnum(static_cast<unsigned char>(venue.front())))
      venue.remove_prefix(1);
    while (!venue.empty() && static_cast<unsigned char>(venue.back()) < 0x80 &&
           std::ispunct(static_cast<unsigned char>(venue.back())))
      venue.remove_suffix(1);
    venue = trim(venue);
    if (!venue.empty()) return std::string(venue);
  }
  return std::nullopt;
}

RuleSet RuleSet::defaults() {
  RuleSet rs;
  rs.add("bought|purchased|got", "by|at|from|in|for|on|with|to");
  return rs;
}

void RuleSet::add(std::string verbs, std::string terminators) {
  std::string stop = R"([.,!?;:()]|$)";
  if (!terminators.empty()) stop = R"(\s+(?:)" + terminators + R"()\b|)" + stop;
  // The object may not open with a terminator ("bought at the shop" names no item).
  const std::string guard = terminators.empty() ? "" : R"((?!(?:)" + terminators + R"()\b))";
  const std::string source = R"(\b(?:)" + verbs + R"()\s+)" + guard + R"((.+?)(?=)" + stop + ")";
  try {
    rules_.push_back({std::move(verbs), std::move(terminators),
                      std::regex(source, std::regex::ECMAScript | std::regex::icase)});
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::BadFormat, "invalid extraction rule '" + source + "': " + e.what());
  }
}

RuleSet RuleSet::parse(std::string_view text) {
  RuleSet rs;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string_view::npos)
      throw Error(ErrorCode::BadFormat,
                  "rule on line " + std::to_string(line_no) + " lacks 'verbs -> terminators'");
    std::string verbs(trim(line.substr(0, arrow)));
    std::string terms(trim(line.substr(arrow + 2)));
    if (verbs.empty())
      throw Error(ErrorCode::BadFormat, "rule on line " + std::to_string(line_no) + " has no verbs");
    rs.add(std::move(verbs), std::move(terms));
  }
  if (rs.empty()) throw Error(ErrorCode::EmptyInput, "rule set has no rules");
  return rs;
}

RuleSet RuleSet::read(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse(text);
}

std::optional<std::string> extract_item(std::string_view text, const RuleSet& rules) {
  const std::string haystack(text);
  for (const auto& rule : rules.rules()) {
    std::smatch match;
    if (!std::regex_search(haystack, match, rule.pattern)) continue;
    std::string item = clean_object(match[1].str());
    if (!item.empty()) return item;
  }
  return std::nullopt;
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.city.empty()) malformed("gazetteer entry with empty name");
    if (!seen.insert(e.city).second)
      throw Error(ErrorCode::DuplicateCity, "city '" + e.city + "' listed twice");
    check_coordinates(e.latitude, e.longitude);
  }
}

Gazetteer Gazetteer::read_csv(std::istream& in) {
  auto rows = csv::read(in);
  std::vector<GazetteerEntry> entries;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 3)
      malformed("gazetteer row " + std::to_string(r + 1) + " must be name,lat,lon");
    auto lat = parse_double(row[1]);
    auto lon = parse_double(row[2]);
    if (!lat || !lon) {
      if (r == 0) continue;
      malformed("gazetteer row " + std::to_string(r + 1) + " has a non-numeric coordinate");
    }
    entries.push_back({row[0], *lat, *lon});
  }
  return Gazetteer(std::move(entries));
}

const GazetteerEntry* Gazetteer::find(std::string_view city) const {
  for (const auto& e : entries_)
    if (e.city == city) return &e;
  return nullptr;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double s1 = std::sin(dlat / 2), s2 = std::sin(dlon / 2);
  const double h = s1 * s1 + std::cos(lat1 * rad) * std::cos(lat2 * rad) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

GeocodeHit reverse_geocode(double latitude, double longitude, const Gazetteer& gz) {
  if (gz.empty()) throw Error(ErrorCode::EmptyGazetteer, "gazetteer has no entries");
  const GazetteerEntry* best = nullptr;
  double best_d = 0.0;
  for (const auto& e : gz.entries()) {
    const double d = haversine_km(latitude, longitude, e.latitude, e.longitude);
    if (!best || d < best_d || (d == best_d && e.city < best->city)) {
      best = &e;
      best_d = d;
    }
  }
  return {best->city, best_d};
}

std::string_view to_string(ReviewReason reason) noexcept {
  switch (reason) {
    case ReviewReason::NoItem: return "NO_ITEM";
    case ReviewReason::NoPlace: return "NO_PLACE";
    case ReviewReason::NoItemNoPlace: return "NO_ITEM_NO_PLACE";
    case ReviewReason::Malformed: return "MALFORMED";
  }
  return "UNKNOWN";
}

std::vector<LabelPair> IngestResult::pairs() const {
  std::vector<LabelPair> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.pair());
  return out;
}

IngestResult to_pairs(const std::vector<RawRecord>& records, const Gazetteer& gz,
                      const RuleSet& rules) {
  IngestResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    auto place = extract_place(rec.text);
    auto item = extract_item(rec.text, rules);
    if (place && item) {
      auto hit = reverse_geocode(rec.latitude, rec.longitude, gz);
      out.records.push_back({std::move(*item), std::move(*place), std::move(hit.city), i});
      continue;
    }
    ReviewReason reason = !place && !item ? ReviewReason::NoItemNoPlace
                          : !place        ? ReviewReason::NoPlace
                                          : ReviewReason::NoItem;
    out.review.push_back({i, reason, rec.text});
  }
  return out;
}

PurchaseRecord purchase_from_pair(const LabelPair& pair) {
  PurchaseRecord r;
  const auto sep = pair.row.find(" _ ");
  if (sep == std::string::npos) {
    r.item = pair.row;
  } else {
    r.item = pair.row.substr(0, sep);
    r.place = pair.row.substr(sep + 3);
  }
  r.city = pair.col;
  return r;
}

void write_review_csv(std::ostream& out, const std::vector<ReviewEntry>& review) {
  csv::write_row(out, {"source", "reason", "text"});
  for (const auto& e : review)
    csv::write_row(out, {std::to_string(e.source), std::string(to_string(e.reason)), e.text});
}

}  // namespace rpclust
