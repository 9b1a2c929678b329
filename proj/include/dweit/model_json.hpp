// Flat-JSON config format for SystemParams: one key per field name.
#pragma once

#include <algorithm>
#include <fstream>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "model.hpp"

namespace dweit {

/// Reads the SystemParams keys of a flat JSON object. Keys that are neither a
/// field name nor listed in `extra_keys` raise UnknownKey. The result is not
/// validated.
inline SystemParams params_from_json(const nlohmann::json& j,
                                     std::span<const std::string_view> extra_keys = {})
{
    if (!j.is_object())
        throw Error(ErrorCode::BadConfig, "config must be a flat JSON object");

    auto number = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number())
            throw Error(ErrorCode::BadConfig, "key '" + key + "' must be a number");
        return v.get<double>();
    };

    SystemParams p;
    for (const auto& [key, value] : j.items()) {
        if (key == "gamma_ab") {
            p.gamma_ab = number(value, key);
            continue;
        }
        auto field = std::find_if(kScalarFields.begin(), kScalarFields.end(),
                                  [&](const ParamField& f) { return f.name == key; });
        if (field != kScalarFields.end()) {
            p.*(field->member) = number(value, key);
            continue;
        }
        if (std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end())
            throw Error(ErrorCode::UnknownKey, "unknown config key '" + key + "'");
    }
    return p;
}

inline nlohmann::json params_to_json(const SystemParams& p)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& field : kScalarFields)
        j[std::string(field.name)] = p.*(field.member);
    if (p.gamma_ab)
        j["gamma_ab"] = *p.gamma_ab;
    return j;
}

inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::BadConfig, "cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::BadConfig, std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace dweit
