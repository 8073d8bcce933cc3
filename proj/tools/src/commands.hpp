#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "run_config.hpp"

namespace weseg::cli {

int cmd_generate(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_train(const RunConfig& cfg, const std::filesystem::path& data,
              const std::filesystem::path& out);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& data,
              const std::filesystem::path& out);
int cmd_infer(const RunConfig& cfg, const std::filesystem::path& checkpoint,
              const std::optional<std::filesystem::path>& manifest,
              const std::optional<std::filesystem::path>& image,
              const std::filesystem::path& out);
int cmd_refine(const RunConfig& cfg, const std::filesystem::path& checkpoint,
               const std::filesystem::path& manifest, const std::filesystem::path& out);
int cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& manifest,
                 const std::optional<std::filesystem::path>& maps,
                 std::string method_label, const std::filesystem::path& out);
int cmd_report(const RunConfig& cfg, const std::filesystem::path& results,
               const std::string& methods_csv, const std::string& reference,
               const std::filesystem::path& out);

}  // namespace weseg::cli
