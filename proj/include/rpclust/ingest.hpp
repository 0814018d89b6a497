#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "rpclust/crosstab.hpp"

namespace rpclust {

/// A geotagged post: timestamp, author, free text and position.
struct RawRecord {
  std::string timestamp;
  std::string user_id;
  std::string text;
  double latitude = 0.0;
  double longitude = 0.0;
};

/// Parses one input line. Lines starting with '{' are JSON objects with keys
/// timestamp, user_id, text and either "coordinates": [lat, lon] or "lat" and
/// "lon". Anything else is CSV: timestamp,user_id,text,lat,lon or
/// timestamp,user_id,text,"[lat, lon]". Throws MalformedRecord naming the
/// offending field.
RawRecord parse_record(std::string_view line);

/// Venue of a check-in style mention "(@ Venue w/N others)": the text after an
/// "@" that is followed by whitespace, cut at ')' or " w/", with leading
/// decoration such as "**" removed.
std::optional<std::string> extract_place(std::string_view text);

/// One purchase-verb rule: a verb alternation and the words that end the
/// object phrase.
struct ExtractionRule {
  std::string verbs;       // e.g. "bought|purchased|got"
  std::string terminators; // e.g. "by|at|from"
  std::regex pattern;
};

class RuleSet {
 public:
  /// Built-in rule for bought / purchased / got.
  static RuleSet defaults();
  /// Text form: one "verbs -> terminators" rule per line, '#' starts a comment.
  static RuleSet parse(std::string_view text);
  static RuleSet read(std::istream& in);

  void add(std::string verbs, std::string terminators);
  const std::vector<ExtractionRule>& rules() const noexcept { return rules_; }
  bool empty() const noexcept { return rules_.empty(); }

 private:
  std::vector<ExtractionRule> rules_;
};

/// Object phrase of the first rule that fires, with leading determiners and
/// trailing punctuation removed.
std::optional<std::string> extract_item(std::string_view text, const RuleSet& rules);

struct GazetteerEntry {
  std::string city;
  double latitude;
  double longitude;
};

class Gazetteer {
 public:
  /// Throws DuplicateCity or MalformedRecord for an invalid coordinate.
  explicit Gazetteer(std::vector<GazetteerEntry> entries);

  /// CSV name,lat,lon; a non-numeric first row is taken as the header.
  static Gazetteer read_csv(std::istream& in);

  const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }
  const GazetteerEntry* find(std::string_view city) const;
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<GazetteerEntry> entries_;
};

inline constexpr double kEarthRadiusKm = 6371.0088;

/// Great-circle distance in km (haversine, mean Earth radius).
double haversine_km(double lat1, double lon1, double lat2, double lon2);

struct GeocodeHit {
  std::string city;
  double distance_km;
};

/// Nearest gazetteer centroid; equal distances go to the lexicographically
/// smaller name. Throws EmptyGazetteer.
GeocodeHit reverse_geocode(double latitude, double longitude, const Gazetteer& gz);

struct PurchaseRecord {
  std::string item;
  std::string place;
  std::string city;
  std::size_t source = 0;  // index into the input record list

  /// "item _ place"
  std::string category() const { return item + " _ " + place; }
  LabelPair pair() const { return {category(), city}; }
};

enum class ReviewReason { NoItem, NoPlace, NoItemNoPlace, Malformed };

std::string_view to_string(ReviewReason reason) noexcept;

struct ReviewEntry {
  std::size_t source;  // record index, or input line for Malformed
  ReviewReason reason;
  std::string text;
};

struct IngestResult {
  std::vector<PurchaseRecord> records;
  std::vector<ReviewEntry> review;

  std::vector<LabelPair> pairs() const;
};

/// Every input record ends up either as a purchase record or in the review
/// queue, both in input order.
IngestResult to_pairs(const std::vector<RawRecord>& records, const Gazetteer& gz,
                      const RuleSet& rules);

/// Splits "item _ place" at the first " _ ". The item is the whole label when
/// no separator is present and the place is then empty.
PurchaseRecord purchase_from_pair(const LabelPair& pair);

void write_review_csv(std::ostream& out, const std::vector<ReviewEntry>& review);

}  // namespace rpclust
