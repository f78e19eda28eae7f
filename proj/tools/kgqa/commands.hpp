// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "settings.hpp"

#include <CLI11.hpp>

#include <string>

namespace kgqa::cli {

/// Registers the flags every subcommand shares and binds them to `o`.
void add_common_options(CLI::App& app, Overrides& o);
void add_kg_options(CLI::App& app, Overrides& o);
void add_agent_options(CLI::App& app, Overrides& o);

void register_sexpr(CLI::App& app, Overrides& o);
void register_agent(CLI::App& app, Overrides& o);
void register_eval(CLI::App& app, Overrides& o);
void register_data(CLI::App& app, Overrides& o);

/// Reads a whole file; IoError when unreadable.
[[nodiscard]] std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

} // namespace kgqa::cli
