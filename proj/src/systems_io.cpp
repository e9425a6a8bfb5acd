#include "gb/systems_io.hpp"

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>
#endif

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gb/errors.hpp"

namespace gb {

using nlohmann::json;

catalog::CatalogEntry system_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("system definition: ") + e.what());
    }
    const std::string kind = doc.value("kind", "builtin");
    if (kind == "builtin") {
        if (!doc.contains("name"))
            throw ConfigError("system definition: builtin reference needs a name");
        return catalog::get(doc["name"].get<std::string>());
    }
    if (kind != "mechanical")
        throw ConfigError("system definition: kind must be builtin or mechanical");

    const int d = doc.value("dim", 1);
    if (d < 1) throw ConfigError("system definition: dim must be positive");
    ConfigSpace space;
    space.dim = d;
    if (doc.contains("periodicity")) {
        for (const auto& b : doc["periodicity"]) space.periodic.push_back(b.get<bool>());
        if (static_cast<int>(space.periodic.size()) != d)
            throw ConfigError("system definition: periodicity length mismatch");
    } else {
        space.periodic.assign(d, true);
    }

    Mat kinetic = Mat::Identity(d, d);
    if (doc.contains("kinetic")) {
        const auto& k = doc["kinetic"];
        if (static_cast<int>(k.size()) != d)
            throw ConfigError("system definition: kinetic matrix shape mismatch");
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) kinetic(i, j) = k[i][j].get<double>();
    }

    std::vector<TrigTerm> pot;
    for (const auto& term : doc.value("potential", json::array())) {
        TrigTerm t;
        t.freq = Vec::Zero(d);
        const auto& f = term.at("freq");
        if (static_cast<int>(f.size()) != d)
            throw ConfigError("system definition: potential frequency shape mismatch");
        for (int i = 0; i < d; ++i) t.freq[i] = f[i].get<double>();
        t.nu = term.value("nu", 0.0);
        t.amplitude = term.value("amplitude", 0.0);
        t.phase = term.value("phase", 0.0);
        pot.push_back(std::move(t));
    }

    TimeDependence time = TimeDependence::autonomous();
    if (doc.contains("time_dependence")) {
        const auto& td = doc["time_dependence"];
        const std::string k = td.value("kind", "autonomous");
        if (k == "periodic")
            time = TimeDependence::periodic(td.value("period", kTwoPi));
        else if (k == "general")
            time = {TimeKind::General, 0.0};
        else if (k != "autonomous")
            throw ConfigError("system definition: unknown time_dependence kind");
    }

    auto lag = std::make_shared<MechanicalLagrangian>(space, time, kinetic, pot);
    catalog::CatalogEntry entry;
    entry.name = doc.value("name", std::string("custom"));
    entry.lagrangian = lag;
    entry.hamiltonian = std::make_shared<MechanicalHamiltonian>(lag);
    entry.facts.reference = {Vec::Zero(d), Vec::Zero(d), 0.0};
    return entry;
}

catalog::CatalogEntry load_system(const std::string& name_or_path) {
    if (std::filesystem::exists(name_or_path)) {
        std::ifstream in(name_or_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return system_from_json(buf.str());
    }
    return catalog::get(name_or_path);
}

std::string system_to_json(const catalog::CatalogEntry& entry) {
    json doc;
    doc["name"] = entry.name;
    auto mech = std::dynamic_pointer_cast<const MechanicalLagrangian>(entry.lagrangian);
    if (!mech) {
        doc["kind"] = "builtin";
        return doc.dump(2);
    }
    const auto& space = mech->space();
    doc["kind"] = "mechanical";
    doc["dim"] = space.dim;
    json per = json::array();
    for (int i = 0; i < space.dim; ++i) per.push_back(space.is_periodic(i));
    doc["periodicity"] = per;
    json kin = json::array();
    for (int i = 0; i < space.dim; ++i) {
        json row = json::array();
        for (int j = 0; j < space.dim; ++j) row.push_back(mech->kinetic()(i, j));
        kin.push_back(row);
    }
    doc["kinetic"] = kin;
    json pot = json::array();
    for (const auto& term : mech->potential()) {
        json t;
        json freq = json::array();
        for (int i = 0; i < space.dim; ++i) freq.push_back(term.freq[i]);
        t["freq"] = freq;
        t["nu"] = term.nu;
        t["amplitude"] = term.amplitude;
        t["phase"] = term.phase;
        pot.push_back(t);
    }
    doc["potential"] = pot;
    const auto& td = mech->time_dependence();
    if (td.kind == TimeKind::Periodic)
        doc["time_dependence"] = {{"kind", "periodic"}, {"period", td.period}};
    else if (td.kind == TimeKind::General)
        doc["time_dependence"] = {{"kind", "general"}};
    else
        doc["time_dependence"] = {{"kind", "autonomous"}};
    return doc.dump(2);
}

}  // namespace gb
