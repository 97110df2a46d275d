#include "cil/harris.hpp"

#include "json.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cil {

namespace {

constexpr int kFormatVersion = 1;
constexpr std::array<char, 4> kMagic{'C', 'I', 'L', 'H'};

static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");

template <typename T> void put(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    out.write(bytes.data(), sizeof(T));
}

template <typename T> T get(std::istream& in) {
    std::array<char, sizeof(T)> bytes{};
    if (!in.read(bytes.data(), sizeof(T))) {
        throw std::runtime_error("truncated Harris record");
    }
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace

std::string to_json(const HarrisWindow& h) {
    nlohmann::json doc;
    doc["format"] = "cil.harris";
    doc["version"] = kFormatVersion;
    doc["rates"] = {{"lambda", h.rates().lambda}, {"range", h.rates().range}};
    doc["window"] = {{"x_min", h.window().x_min}, {"x_max", h.window().x_max}, {"t_max", h.window().t_max}};
    doc["seed"] = h.seed();
    auto& events = doc["events"] = nlohmann::json::array();
    for (const auto& e : h.events()) {
        if (e.is_recovery()) {
            events.push_back({{"kind", "recovery"}, {"x", e.source}, {"t", e.time}});
        } else {
            events.push_back({{"kind", "arrow"}, {"x", e.source}, {"y", e.target}, {"t", e.time}});
        }
    }
    return doc.dump();
}

HarrisWindow harris_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "cil.harris" || doc.value("version", 0) != kFormatVersion) {
        throw std::invalid_argument("not a version-1 cil.harris document");
    }
    Rates rates{doc["rates"]["lambda"].get<double>(), doc["rates"]["range"].get<int>()};
    Window window{doc["window"]["x_min"].get<Site>(), doc["window"]["x_max"].get<Site>(),
                  doc["window"]["t_max"].get<double>()};
    std::vector<Event> events;
    events.reserve(doc["events"].size());
    for (const auto& rec : doc["events"]) {
        const auto kind = rec.at("kind").get<std::string>();
        const auto t = rec.at("t").get<double>();
        if (kind == "recovery") {
            events.push_back(Event::recovery(rec.at("x").get<Site>(), t));
        } else if (kind == "arrow") {
            events.push_back(Event::arrow(rec.at("x").get<Site>(), rec.at("y").get<Site>(), t));
        } else {
            throw std::invalid_argument("unknown event kind '" + kind + "'");
        }
    }
    return HarrisWindow(rates, window, std::move(events), doc["seed"].get<std::uint64_t>());
}

void write_binary(std::ostream& out, const HarrisWindow& h) {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kFormatVersion);
    put<double>(out, h.rates().lambda);
    put<std::int32_t>(out, h.rates().range);
    put<std::int32_t>(out, h.window().x_min);
    put<std::int32_t>(out, h.window().x_max);
    put<double>(out, h.window().t_max);
    put<std::uint64_t>(out, h.seed());
    put<std::uint64_t>(out, h.events().size());
    for (const auto& e : h.events()) {
        put<std::uint8_t>(out, static_cast<std::uint8_t>(e.kind));
        put<std::int32_t>(out, e.source);
        put<std::int32_t>(out, e.target);
        put<double>(out, e.time);
    }
}

HarrisWindow read_binary(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error("missing CILH magic");
    }
    if (get<std::uint32_t>(in) != kFormatVersion) {
        throw std::runtime_error("unsupported Harris record version");
    }
    Rates rates;
    rates.lambda = get<double>(in);
    rates.range = get<std::int32_t>(in);
    Window window;
    window.x_min = get<std::int32_t>(in);
    window.x_max = get<std::int32_t>(in);
    window.t_max = get<double>(in);
    const auto seed = get<std::uint64_t>(in);
    const auto count = get<std::uint64_t>(in);
    std::vector<Event> events;
    events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto kind = get<std::uint8_t>(in);
        if (kind > 1) throw std::runtime_error("bad event kind in Harris record");
        Event e;
        e.kind = static_cast<EventKind>(kind);
        e.source = get<std::int32_t>(in);
        e.target = get<std::int32_t>(in);
        e.time = get<double>(in);
        events.push_back(e);
    }
    return HarrisWindow(rates, window, std::move(events), seed);
}

} // namespace cil
