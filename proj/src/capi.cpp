#include "consist.h"

#include <stdexcept>
#include <string>
#include <vector>

#include "consist/constraints.hpp"
#include "consist/harness.hpp"
#include "consist/metrics.hpp"

namespace {

thread_local std::string g_last_error;

consist_status fail(consist_status code, const char* what) {
  g_last_error = what;
  return code;
}

// Maps C++ exceptions onto status codes at the boundary.
template <typename Fn>
consist_status guarded(Fn&& fn) {
  try {
    fn();
    return CONSIST_OK;
  } catch (const std::invalid_argument& e) {
    return fail(CONSIST_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(CONSIST_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(CONSIST_ERR_PARSE, e.what());
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.find("cannot open") != std::string::npos ||
        what.find("cannot write") != std::string::npos)
      return fail(CONSIST_ERR_IO, e.what());
    return fail(CONSIST_ERR_RUN_FAILED, e.what());
  } catch (const std::exception& e) {
    return fail(CONSIST_ERR_INTERNAL, e.what());
  }
}

consist::EvidenceVector to_vector(const int8_t* z, int z_len) {
  if (z == nullptr && z_len > 0) throw std::invalid_argument("null evidence vector");
  return consist::EvidenceVector(z, z + z_len);
}

}  // namespace

struct consist_spec {
  consist::ConstraintSpec impl;
};

extern "C" {

const char* consist_last_error(void) { return g_last_error.c_str(); }

const char* consist_status_name(consist_status status) {
  switch (status) {
    case CONSIST_OK: return "ok";
    case CONSIST_ERR_IO: return "io-error";
    case CONSIST_ERR_PARSE: return "parse-error";
    case CONSIST_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case CONSIST_ERR_RUN_FAILED: return "run-failed";
    case CONSIST_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

consist_status consist_spec_load(const char* path, consist_spec** out) {
  if (!path || !out) return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&]() { *out = new consist_spec{consist::parse_spec_file(path)}; });
}

consist_status consist_spec_parse(const char* json_text, consist_spec** out) {
  if (!json_text || !out) return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&]() {
    *out = new consist_spec{consist::parse_spec(nlohmann::json::parse(json_text))};
  });
}

void consist_spec_free(consist_spec* spec) { delete spec; }

int consist_spec_num_classes(const consist_spec* spec) {
  return spec ? spec->impl.num_classes : -1;
}

int consist_spec_num_evidence(const consist_spec* spec) {
  return spec ? spec->impl.num_evidence() : -1;
}

consist_status consist_check(const consist_spec* spec, int y, const int8_t* z, int z_len,
                             consist_verdict* out) {
  if (!spec || !out) return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    switch (consist::check_consistent(spec->impl, y, to_vector(z, z_len))) {
      case consist::Verdict::Consistent: *out = CONSIST_CONSISTENT; break;
      case consist::Verdict::Incompatible: *out = CONSIST_INCOMPATIBLE; break;
      case consist::Verdict::Insufficient: *out = CONSIST_INSUFFICIENT; break;
      case consist::Verdict::Both: *out = CONSIST_BOTH; break;
    }
  });
}

consist_status consist_r1_example(const consist_spec* spec, int y, const int8_t* z, int z_len,
                                  int* out) {
  if (!spec || !out) return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() { *out = consist::r1_example(spec->impl, y, to_vector(z, z_len)); });
}

consist_status consist_r2_example(const consist_spec* spec, int y, const int8_t* z, int z_len,
                                  int* out) {
  if (!spec || !out) return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() { *out = consist::r2_example(spec->impl, y, to_vector(z, z_len)); });
}

consist_status consist_cmd_validate(const char* spec_path, const char* predictions_path,
                                    const char* out_dir) {
  if (!spec_path || !predictions_path || !out_dir)
    return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() { consist::cmd_validate(spec_path, predictions_path, out_dir); });
}

consist_status consist_cmd_gen(const char* config_path, const char* out_path) {
  if (!config_path || !out_path) return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() { consist::cmd_gen(config_path, out_path); });
}

consist_status consist_cmd_train(const char* spec_path, const char* data_path,
                                 const char* config_path, double omega1, double omega2,
                                 const char* mode, uint64_t seed, const char* out_dir) {
  if (!spec_path || !data_path || !config_path || !mode || !out_dir)
    return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    consist::cmd_train(spec_path, data_path, config_path, omega1, omega2, mode, seed, out_dir);
  });
}

consist_status consist_cmd_sweep(const char* grid_path, const char* out_dir) {
  if (!grid_path || !out_dir) return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  consist_status status = CONSIST_OK;
  const consist_status outer = guarded([&]() {
    if (!consist::cmd_sweep(grid_path, out_dir))
      status = fail(CONSIST_ERR_RUN_FAILED, "one or more sweep runs failed");
  });
  return outer != CONSIST_OK ? outer : status;
}

consist_status consist_cmd_report(const char* const* inputs, int n_inputs, const char* out_path) {
  if (!inputs || n_inputs < 1 || !out_path)
    return fail(CONSIST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    std::vector<std::string> paths(inputs, inputs + n_inputs);
    consist::cmd_report(paths, out_path);
  });
}

}  // extern "C"
