#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdl/ingest.hpp"
#include "bdl/model.hpp"

// Built-in behavior models (reverse shell, mail service, the minimal
// inbound-connection domain) and the seeded synthetic trace generator that
// stands in for a live capture rig.

namespace bdl {

enum class BehaviorLabel {
  SmtpReceive,
  ImapReceive,
  Forward,
  ImapLogin,
  Other,
  RemoteShell,
};

inline constexpr int kBehaviorLabelCount = 6;

const std::vector<BehaviorLabel>& all_labels();
std::string label_name(BehaviorLabel label);
std::optional<BehaviorLabel> label_from_name(const std::string& name);

struct BehaviorProblem {
  Problem problem;
  std::vector<MappingRule> mapping;
};

// Parsed from the shipped .bdl sources (embedded at build time, identical to
// the files under domains/).
const BehaviorProblem& reverse_shell_problem();
const BehaviorProblem& mail_problem();
const BehaviorProblem& background_problem();

struct LabeledTrace {
  std::vector<TraceEvent> events;
  BehaviorLabel label = BehaviorLabel::Other;
  uint64_t seed = 0;
  // Positions in `events` that belong to the behavior skeleton (everything
  // else is interchangeable benign noise).
  std::vector<size_t> skeleton_indices;
};

// Deterministic per (label, seed): a behavior skeleton interleaved with
// benign noise syscalls, descriptor numbers allocated lowest-free like the
// kernel would. 50–300 events.
LabeledTrace generate_trace(BehaviorLabel label, uint64_t seed);

// Fixed 12-syscall benign noise vocabulary (no sleep — that name is reserved
// for the obfuscation no-op — and no file writes).
const std::vector<std::string>& noise_syscalls();

}  // namespace bdl
