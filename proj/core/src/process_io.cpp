#include "cil/process.hpp"

#include "json.hpp"

#include <stdexcept>

namespace cil {

std::string to_rle_json(const Configuration& c) {
    nlohmann::json doc;
    doc["format"] = "cil.configuration";
    doc["version"] = 1;
    doc["alphabet"] = to_string(c.alphabet());
    doc["x_min"] = c.x_min();
    doc["outside"] = {c.outside_left(), c.outside_right()};
    auto& runs = doc["runs"] = nlohmann::json::array();
    const auto s = c.states();
    for (std::size_t i = 0; i < s.size();) {
        std::size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        runs.push_back({s[i], j - i});
        i = j;
    }
    return doc.dump();
}

Configuration configuration_from_rle_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "cil.configuration") {
        throw std::invalid_argument("not a cil.configuration document");
    }
    std::vector<State> states;
    for (const auto& run : doc.at("runs")) {
        const auto value = run.at(0).get<State>();
        const auto length = run.at(1).get<std::size_t>();
        states.insert(states.end(), length, value);
    }
    State left = 0;
    State right = 0;
    if (doc.contains("outside")) {
        left = doc["outside"].at(0).get<State>();
        right = doc["outside"].at(1).get<State>();
    }
    return Configuration(doc.at("x_min").get<Site>(), std::move(states),
                         alphabet_from_string(doc.at("alphabet").get<std::string>()), left, right);
}

} // namespace cil
