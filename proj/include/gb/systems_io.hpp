#pragma once

#include <string>

#include "gb/catalog.hpp"
#include "gb/models.hpp"

namespace gb {

/// Resolve a system reference: a builtin catalog name, or a path to a
/// system-definition JSON file ({name, dim, periodicity, kind,
/// potential, kinetic, time_dependence}).
catalog::CatalogEntry load_system(const std::string& name_or_path);

/// Parse a system-definition document.
catalog::CatalogEntry system_from_json(const std::string& text);

/// Export a catalog entry to the system-definition format. Mechanical
/// systems serialize their full tables; other builtins export a reference
/// by name.
std::string system_to_json(const catalog::CatalogEntry& entry);

}  // namespace gb
