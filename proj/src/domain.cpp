#include <lbs/domain.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <utility>

namespace lbs {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 25> kErrorNames{{
    {ErrorCode::InvalidPhone, "InvalidPhone"},
    {ErrorCode::DuplicatePhone, "DuplicatePhone"},
    {ErrorCode::WeakPassword, "WeakPassword"},
    {ErrorCode::AuthFailed, "AuthFailed"},
    {ErrorCode::InvalidToken, "InvalidToken"},
    {ErrorCode::UnknownUser, "UnknownUser"},
    {ErrorCode::UnknownZone, "UnknownZone"},
    {ErrorCode::UnknownTag, "UnknownTag"},
    {ErrorCode::NotCovered, "NotCovered"},
    {ErrorCode::Underdetermined, "Underdetermined"},
    {ErrorCode::DegenerateGeometry, "DegenerateGeometry"},
    {ErrorCode::NotFound, "NotFound"},
    {ErrorCode::NotAuthorized, "NotAuthorized"},
    {ErrorCode::WrongZone, "WrongZone"},
    {ErrorCode::CspUnreachable, "CspUnreachable"},
    {ErrorCode::NoCuForZone, "NoCuForZone"},
    {ErrorCode::PartialResult, "PartialResult"},
    {ErrorCode::ConfigError, "ConfigError"},
    {ErrorCode::BindError, "BindError"},
    {ErrorCode::ParseError, "ParseError"},
    {ErrorCode::ZoneMismatch, "ZoneMismatch"},
    {ErrorCode::StepFailed, "StepFailed"},
    {ErrorCode::InvalidField, "InvalidField"},
    {ErrorCode::LspUnreachable, "LspUnreachable"},
    {ErrorCode::InternalError, "InternalError"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  for (const auto& [c, name] : kErrorNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view text) noexcept {
  for (const auto& [c, name] : kErrorNames) {
    if (name == text) return c;
  }
  return std::nullopt;
}

Timestamp now_utc() noexcept {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

PhoneNumber PhoneNumber::parse(std::string_view raw) {
  std::string_view body = raw;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  std::string digits;
  digits.reserve(body.size());
  for (char c : body) {
    if (c == ' ' || c == '-') continue;
    if (c < '0' || c > '9') throw Error(ErrorCode::InvalidPhone, "non-digit in '" + std::string(raw) + "'");
    digits.push_back(c);
  }
  if (digits.size() < 7 || digits.size() > 15) {
    throw Error(ErrorCode::InvalidPhone, "'" + std::string(raw) + "' must have 7-15 digits");
  }
  return PhoneNumber(std::move(digits));
}

ServiceCategory ServiceCategory::parse(std::string_view raw) {
  if (raw.empty() || raw.size() > 32) {
    throw Error(ErrorCode::InvalidField, "category must be 1-32 characters");
  }
  std::string name;
  name.reserve(raw.size());
  for (char c : raw) {
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool ok = (lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9') ||
                    lower == '_' || lower == '-';
    if (!ok) throw Error(ErrorCode::InvalidField, "bad category '" + std::string(raw) + "'");
    name.push_back(lower);
  }
  return ServiceCategory(std::move(name));
}

bool operator==(const Restaurant& a, const Restaurant& b) {
  return a.restaurant_id == b.restaurant_id && a.name == b.name && a.address == b.address &&
         a.contact == b.contact && a.food_style == b.food_style && a.position == b.position &&
         a.zone_id == b.zone_id;
}

const Restaurant& validate_restaurant(const Restaurant& record, const ZoneMap& zones) {
  if (record.restaurant_id.empty()) throw Error(ErrorCode::InvalidField, "empty restaurant_id");
  if (record.name.empty()) throw Error(ErrorCode::InvalidField, "empty name");
  if (record.address.empty()) throw Error(ErrorCode::InvalidField, "empty address");
  const Zone& zone = zones.at(record.zone_id);
  if (!point_in_polygon(record.position, zone.polygon)) {
    throw Error(ErrorCode::ZoneMismatch,
                "restaurant '" + record.restaurant_id + "' lies outside zone '" + record.zone_id + "'");
  }
  return record;
}

}  // namespace lbs
