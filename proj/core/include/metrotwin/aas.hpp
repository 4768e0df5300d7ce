#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metrotwin/rules.hpp"
#include "metrotwin/twin.hpp"

namespace metrotwin {

/// Version tag written into every submodel document.
inline constexpr std::string_view kSubmodelSchema = "metrotwin.measurement-submodel/1";

struct SubmodelElement {
  enum class Type { number, text, timestamp, series };

  std::string id_short;
  std::string semantic_id;
  Type type = Type::text;
  /// Numeric value (number).
  double number = 0.0;
  /// Text, RFC 3339 time (timestamp) or a relative file reference (series).
  std::string text;
  /// Numbers always carry a unit and both uncertainty parts, possibly zero.
  std::string unit;
  double u_random = 0.0;
  double u_systematic = 0.0;

  bool operator==(const SubmodelElement&) const = default;
};

/// Measurement submodel of one asset (a sensor twin or a virtual sensor).
struct Submodel {
  std::string schema_version{kSubmodelSchema};
  std::string asset_id;
  std::string submodel_id;
  /// "physical" or "virtual".
  std::string provenance;
  std::vector<SubmodelElement> elements;

  const SubmodelElement* find(std::string_view id_short) const;
  bool operator==(const Submodel&) const = default;
};

/// Checks unique idShorts and complete numeric elements; throws validation_error.
void validate(const Submodel& submodel);

std::string submodel_to_json(const Submodel& submodel);
Submodel submodel_from_json(std::string_view text);

/// Submodel of a twin over the closed range [from, to]: identity, certificate
/// summary, latest buffered measurement and a reference to `stream_ref`.
Submodel export_submodel(const TwinState& twin, const std::string& stream_ref, Timestamp from, Timestamp to);

/// Submodel of a virtual stream, marked virtual and carrying the rule text.
Submodel export_submodel(const VirtualSensorRule& rule, std::span<const Measurement> stream,
                         const std::string& stream_ref, Timestamp from, Timestamp to);

/// Builds the submodel of `stream_id` from a run directory (physical sensors
/// from streams/ and certificates/, virtual ones from virtual/). Without a
/// range the whole stream is covered. Throws unknown_stream.
Submodel export_from_run(const std::filesystem::path& run_dir, const std::string& stream_id,
                         std::optional<Timestamp> from = {}, std::optional<Timestamp> to = {});

}  // namespace metrotwin
