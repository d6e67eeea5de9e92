#include "varicon/space.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace varicon {
namespace {

const std::unordered_set<std::string_view> kReserved = {
    "sin", "cos", "sqrt", "abs", "sign", "pow", "d",
};

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace

Space::Space(int base_dim, std::vector<std::string> fields,
             std::vector<std::string> params)
    : base_dim_(base_dim), fields_(std::move(fields)), params_(std::move(params)) {
  if (base_dim_ < 1) throw SchemaError("base dimension must be at least 1");
  if (fields_.empty()) throw SchemaError("a space needs at least one field");

  std::unordered_set<std::string_view> seen;
  auto admit = [&](const std::string& name, const char* role) {
    if (!valid_identifier(name))
      throw SchemaError(std::string(role) + " name '" + name + "' is not a valid identifier");
    if (kReserved.count(name))
      throw SchemaError(std::string(role) + " name '" + name + "' is a reserved word");
    if (base_index(name) >= 0)
      throw SchemaError(std::string(role) + " name '" + name + "' shadows a base coordinate");
    if (!seen.insert(name).second)
      throw SchemaError("duplicate name '" + name + "' in space");
  };
  for (const auto& f : fields_) admit(f, "field");
  for (const auto& p : params_) admit(p, "parameter");
}

int Space::field_index(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < fields_.size(); ++i)
    if (fields_[i] == name) return static_cast<int>(i);
  return -1;
}

int Space::param_index(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i] == name) return static_cast<int>(i);
  return -1;
}

int Space::base_index(std::string_view name) const noexcept {
  if (base_dim_ == 1 && name == "t") return 0;
  if (name.size() < 2 || name[0] != 'x') return -1;
  int value = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    char c = name[i];
    if (c < '0' || c > '9') return -1;
    value = value * 10 + (c - '0');
  }
  if (name.size() > 2 && name[1] == '0') return -1;  // no leading zeros: x01 is not a coordinate
  return value < base_dim_ ? value : -1;
}

SpacePtr make_space(int base_dim, std::vector<std::string> fields,
                    std::vector<std::string> params) {
  return std::make_shared<const Space>(base_dim, std::move(fields), std::move(params));
}

}  // namespace varicon
