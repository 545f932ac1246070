#include "bdl/behaviors.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <set>
#include <stdexcept>

#include "bdl/language.hpp"
#include "bdl/rng.hpp"
#include "embedded_domains.hpp"

namespace bdl {

const std::vector<BehaviorLabel>& all_labels() {
  static const std::vector<BehaviorLabel> labels = {
      BehaviorLabel::SmtpReceive, BehaviorLabel::ImapReceive, BehaviorLabel::Forward,
      BehaviorLabel::ImapLogin,   BehaviorLabel::Other,       BehaviorLabel::RemoteShell,
  };
  return labels;
}

std::string label_name(BehaviorLabel label) {
  switch (label) {
    case BehaviorLabel::SmtpReceive: return "smtp-receive";
    case BehaviorLabel::ImapReceive: return "imap-receive";
    case BehaviorLabel::Forward: return "forward";
    case BehaviorLabel::ImapLogin: return "imap-login";
    case BehaviorLabel::Other: return "other";
    case BehaviorLabel::RemoteShell: return "remote-shell";
  }
  return "other";
}

std::optional<BehaviorLabel> label_from_name(const std::string& name) {
  for (BehaviorLabel l : all_labels())
    if (label_name(l) == name) return l;
  return std::nullopt;
}

namespace {

BehaviorProblem load(const char* domain_text, const char* problem_text, const char* what) {
  auto d = parse_domain(domain_text, what);
  if (!d.ok()) {
    std::string msg = std::string("built-in domain '") + what + "' failed to parse:";
    for (const auto& e : d.errors) msg += "\n  " + to_string(e);
    throw std::logic_error(msg);
  }
  auto p = parse_problem(problem_text, *d.value, what);
  if (!p.ok()) {
    std::string msg = std::string("built-in problem '") + what + "' failed to parse:";
    for (const auto& e : p.errors) msg += "\n  " + to_string(e);
    throw std::logic_error(msg);
  }
  return {std::move(p.value->problem), std::move(p.value->mapping)};
}

}  // namespace

const BehaviorProblem& reverse_shell_problem() {
  static const BehaviorProblem bp =
      load(embedded::kReverseShellDomain, embedded::kReverseShellProblem, "reverse-shell");
  return bp;
}

const BehaviorProblem& mail_problem() {
  static const BehaviorProblem bp =
      load(embedded::kMailDomain, embedded::kMailProblem, "mail-service");
  return bp;
}

const BehaviorProblem& background_problem() {
  static const BehaviorProblem bp =
      load(embedded::kBackgroundDomain, embedded::kBackgroundProblem, "socket-basics");
  return bp;
}

const std::vector<std::string>& noise_syscalls() {
  static const std::vector<std::string> names = {
      "open", "read", "close", "stat",  "fstat", "lseek",
      "getpid", "getuid", "brk", "mmap", "munmap", "sched_yield",
  };
  return names;
}

// ---------------------------------------------------------------------------
// Synthetic trace generator
// ---------------------------------------------------------------------------

namespace {

class TraceBuilder {
 public:
  TraceBuilder(uint64_t seed, const std::array<uint32_t, 6>& noise_weights)
      : rng_(seed), noise_weights_(noise_weights) {
    open_fds_ = {0, 1, 2};
  }

  SplitMix64& rng() { return rng_; }

  int64_t alloc_fd() {
    int64_t fd = 0;
    while (open_fds_.count(fd)) ++fd;
    open_fds_.insert(fd);
    return fd;
  }

  void mark_closed(int64_t fd) { open_fds_.erase(fd); }
  void mark_open(int64_t fd) { open_fds_.insert(fd); }

  void emit(std::string name, std::map<std::string, std::string> args, int64_t ret) {
    TraceEvent ev;
    ev.seq = static_cast<int64_t>(events_.size() + 1);
    ev.syscall = std::move(name);
    ev.args = std::move(args);
    ev.ret = ret;
    events_.push_back(std::move(ev));
  }

  // --- skeleton building blocks -------------------------------------------

  int64_t sys_socket(bool cloexec) {
    int64_t fd = alloc_fd();
    emit("socket",
         {{"domain", "AF_INET"},
          {"type", "SOCK_STREAM"},
          {"flags", cloexec ? "SOCK_CLOEXEC" : ""}},
         fd);
    return fd;
  }

  void sys_connect(int64_t fd, const std::string& port) {
    emit("connect", {{"fd", std::to_string(fd)}, {"addr", random_addr()}, {"port", port}}, 0);
  }

  void sys_bind(int64_t fd, const std::string& port) {
    emit("bind", {{"fd", std::to_string(fd)}, {"addr", "0.0.0.0"}, {"port", port}}, 0);
  }

  void sys_listen(int64_t fd) {
    emit("listen", {{"fd", std::to_string(fd)}, {"backlog", "16"}}, 0);
  }

  int64_t sys_accept(int64_t fd) {
    int64_t conn = alloc_fd();
    emit("accept", {{"fd", std::to_string(fd)}, {"addr", random_addr()}}, conn);
    return conn;
  }

  void sys_read(int64_t fd) {
    emit("read", {{"fd", std::to_string(fd)}, {"size", "8192"}},
         rng_.range(64, 4096));
  }

  void sys_write(int64_t fd) {
    int64_t n = rng_.range(64, 4096);
    emit("write", {{"fd", std::to_string(fd)}, {"size", std::to_string(n)}}, n);
  }

  int64_t sys_open(const std::string& path) {
    int64_t fd = alloc_fd();
    emit("open", {{"filename", path}, {"flags", "O_RDONLY"}}, fd);
    return fd;
  }

  int64_t sys_open_rw(const std::string& path) {
    int64_t fd = alloc_fd();
    emit("open", {{"filename", path}, {"flags", "O_WRONLY|O_CREAT"}}, fd);
    return fd;
  }

  void sys_close(int64_t fd) {
    mark_closed(fd);
    emit("close", {{"fd", std::to_string(fd)}}, 0);
  }

  void sys_dup2(int64_t oldfd, int64_t newfd) {
    mark_open(newfd);
    emit("dup2", {{"fd", std::to_string(oldfd)}, {"newfd", std::to_string(newfd)}}, newfd);
  }

  void sys_execve(const std::string& path) {
    emit("execve", {{"filename", path}}, 0);
  }

  // --- benign noise ---------------------------------------------------------

  // One burst of 1..3 noise events, drawn from a per-process weight profile
  // (different programs have different syscall diets). Never writes, never
  // touches descriptors it does not own, never uses the obfuscation no-op.
  void noise_burst() {
    uint32_t total = 0;
    for (uint32_t w : noise_weights_) total += w;
    uint64_t roll = rng_.below(total);
    size_t pick = 0;
    for (; pick < noise_weights_.size(); ++pick) {
      if (roll < noise_weights_[pick]) break;
      roll -= noise_weights_[pick];
    }
    switch (pick) {
      case 0: {  // touch a file, maybe keep it open
        int64_t fd = sys_open(random_file());
        if (rng_.chance(70)) sys_read(fd);
        if (rng_.chance(70) || held_fds_.size() >= 6)
          sys_close(fd);
        else
          held_fds_.push_back(fd);
        break;
      }
      case 1:
        emit("stat", {{"path", random_file()}}, 0);
        break;
      case 2: {
        int64_t fd = held_fds_.empty() ? 2 : held_fds_[rng_.below(held_fds_.size())];
        if (rng_.chance(50))
          emit("fstat", {{"fd", std::to_string(fd)}}, 0);
        else
          emit("lseek", {{"fd", std::to_string(fd)}, {"offset", "0"}, {"whence", "SEEK_SET"}}, 0);
        break;
      }
      case 3:
        emit(rng_.chance(50) ? "getpid" : "getuid", {}, rng_.range(100, 32000));
        break;
      case 4:
        if (rng_.chance(50))
          emit("brk", {{"addr", "0"}}, rng_.range(4096, 1 << 20));
        else
          emit("sched_yield", {}, 0);
        break;
      case 5: {
        if (rng_.chance(60)) {
          emit("mmap", {{"length", "4096"}, {"prot", "PROT_READ"}}, rng_.range(1 << 20, 1 << 24));
        } else {
          emit("munmap", {{"length", "4096"}}, 0);
        }
        break;
      }
    }
  }

  void release_held() {
    for (int64_t fd : held_fds_)
      if (rng_.chance(60)) sys_close(fd);
    held_fds_.clear();
  }

  std::string random_file() {
    static const char* files[] = {
        "/etc/hosts",       "/etc/resolv.conf", "/var/log/mail.log",
        "/etc/nsswitch.conf", "/usr/lib/locale/C.UTF-8", "/proc/self/stat",
    };
    return files[rng_.below(6)];
  }

  std::string random_addr() {
    return "172.17.0." + std::to_string(rng_.range(2, 9));
  }

  size_t size() const { return events_.size(); }
  std::vector<TraceEvent> take() { return std::move(events_); }

 private:
  SplitMix64 rng_;
  std::array<uint32_t, 6> noise_weights_;
  std::set<int64_t> open_fds_;
  std::vector<int64_t> held_fds_;
  std::vector<TraceEvent> events_;
};

// A skeleton is a list of atomic segments; noise is injected between
// segments only, so that a freed descriptor cannot be stolen before the
// dup2 that re-targets it.
using Segment = std::function<void(TraceBuilder&)>;

// Per-process noise diet: weights over {file-touch, stat, fstat/lseek,
// getpid/getuid, brk/sched_yield, mmap/munmap}. Real daemons have strongly
// characteristic syscall mixes, which is what a syntactic classifier learns.
std::array<uint32_t, 6> noise_profile(BehaviorLabel label) {
  switch (label) {
    case BehaviorLabel::SmtpReceive: return {15, 35, 20, 10, 10, 10};  // map lookups
    case BehaviorLabel::ImapReceive: return {40, 10, 25, 10, 5, 10};   // mailbox files
    case BehaviorLabel::Forward:     return {10, 25, 10, 35, 10, 10};  // queue manager
    case BehaviorLabel::ImapLogin:   return {5, 10, 10, 45, 20, 10};   // auth lookups
    case BehaviorLabel::Other:       return {30, 15, 15, 10, 20, 10};
    case BehaviorLabel::RemoteShell: return {5, 10, 5, 15, 25, 40};    // loader activity
  }
  return {1, 1, 1, 1, 1, 1};
}

void append_skeleton(std::vector<Segment>& segs, BehaviorLabel label) {
  struct Ctx {
    int64_t s = -1, c = -1, f = -1, g = -1;
  };
  auto ctx = std::make_shared<Ctx>();
  switch (label) {
    case BehaviorLabel::SmtpReceive:
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->s = b.sys_socket(false);
        b.sys_bind(ctx->s, "25");
        b.sys_listen(ctx->s);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->c = b.sys_accept(ctx->s);
        b.sys_write(ctx->c);  // 220 banner
        b.sys_read(ctx->c);
      });
      segs.push_back([ctx](TraceBuilder& b) {  // DATA phase
        int64_t n = b.rng().range(2, 5);
        for (int64_t i = 0; i < n; ++i) {
          b.sys_read(ctx->c);
          if (b.rng().chance(40)) b.sys_write(ctx->c);
        }
      });
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->f = b.sys_open_rw("/var/mail/inbox");
        int64_t n = b.rng().range(1, 4);
        for (int64_t i = 0; i < n; ++i) b.sys_write(ctx->f);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_close(ctx->c);
        if (b.rng().chance(50)) b.sys_close(ctx->f);
        if (b.rng().chance(50)) b.sys_close(ctx->s);
      });
      break;
    case BehaviorLabel::ImapReceive:
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->s = b.sys_socket(false);
        b.sys_connect(ctx->s, "143");
        b.sys_read(ctx->s);  // greeting
      });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_write(ctx->s);  // LOGIN + FETCH
        int64_t n = b.rng().range(2, 6);
        for (int64_t i = 0; i < n; ++i) b.sys_read(ctx->s);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->f = b.sys_open_rw("/home/mail/INBOX");
        int64_t n = b.rng().range(1, 4);
        for (int64_t i = 0; i < n; ++i) b.sys_write(ctx->f);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_close(ctx->f);
        if (b.rng().chance(70)) b.sys_close(ctx->s);
      });
      break;
    case BehaviorLabel::Forward:
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->f = b.sys_open("/var/spool/mail/outgoing");
        int64_t n = b.rng().range(1, 3);
        for (int64_t i = 0; i < n; ++i) b.sys_read(ctx->f);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->s = b.sys_socket(false);
        b.sys_connect(ctx->s, "25");
        b.sys_read(ctx->s);  // 220 greeting
      });
      segs.push_back([ctx](TraceBuilder& b) {  // HELO/MAIL/RCPT/DATA
        int64_t n = b.rng().range(2, 5);
        for (int64_t i = 0; i < n; ++i) {
          b.sys_write(ctx->s);
          if (b.rng().chance(60)) b.sys_read(ctx->s);
        }
      });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_close(ctx->s);
        b.sys_close(ctx->f);
      });
      break;
    case BehaviorLabel::ImapLogin:
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->s = b.sys_socket(false);
        b.sys_connect(ctx->s, "143");
        b.sys_read(ctx->s);  // greeting
      });
      segs.push_back([ctx](TraceBuilder& b) {  // LOGIN exchange
        b.sys_write(ctx->s);
        b.sys_read(ctx->s);
        if (b.rng().chance(50)) {
          b.sys_write(ctx->s);
          b.sys_read(ctx->s);
        }
      });
      segs.push_back([ctx](TraceBuilder& b) { if (b.rng().chance(70)) b.sys_close(ctx->s); });
      break;
    case BehaviorLabel::Other:
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->f = b.sys_open("/etc/passwd");
        b.sys_read(ctx->f);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->g = b.sys_open_rw("/tmp/scratch");
        int64_t n = b.rng().range(1, 4);
        for (int64_t i = 0; i < n; ++i) b.sys_write(ctx->g);
      });
      segs.push_back([ctx](TraceBuilder& b) { if (b.rng().chance(50)) b.sys_read(ctx->f); });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_close(ctx->f);
        b.sys_close(ctx->g);
      });
      break;
    case BehaviorLabel::RemoteShell:
      segs.push_back([ctx](TraceBuilder& b) {
        ctx->s = b.sys_socket(false);
        b.sys_connect(ctx->s, "4444");
      });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_close(0);
        b.sys_dup2(ctx->s, 0);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_close(1);
        b.sys_dup2(ctx->s, 1);
      });
      segs.push_back([ctx](TraceBuilder& b) {
        b.sys_execve(b.rng().chance(50) ? "/bin/sh" : "/bin/bash");
      });
      break;
  }
}

}  // namespace

LabeledTrace generate_trace(BehaviorLabel label, uint64_t seed) {
  uint64_t label_index = 0;
  for (size_t i = 0; i < all_labels().size(); ++i)
    if (all_labels()[i] == label) label_index = i;
  TraceBuilder b(mix_seed(seed, 0x62646c00 + label_index), noise_profile(label));

  std::vector<Segment> segments;
  append_skeleton(segments, label);

  // Noise fills the gaps between skeleton segments up to per-gap absolute
  // checkpoints; the skeleton budget keeps the worst-case total inside
  // 50..300 (segments emit at most 3 events, held releases are capped at 6,
  // a burst overshoots a checkpoint by at most 2).
  int64_t target = b.rng().range(60, 290);
  int64_t skeleton_budget = 32;  // worst-case skeleton (24) + held releases + overshoot
  int64_t noise_total = std::max<int64_t>(0, target - skeleton_budget);
  size_t gaps = segments.size() + 1;
  int64_t skeleton_events = 0;
  std::vector<size_t> skeleton_indices;
  for (size_t i = 0; i < gaps; ++i) {
    int64_t checkpoint =
        noise_total * static_cast<int64_t>(i + 1) / static_cast<int64_t>(gaps);
    while (static_cast<int64_t>(b.size()) - skeleton_events < checkpoint)
      b.noise_burst();
    if (i < segments.size()) {
      size_t before = b.size();
      segments[i](b);
      for (size_t k = before; k < b.size(); ++k) skeleton_indices.push_back(k);
      skeleton_events += static_cast<int64_t>(b.size() - before);
    }
  }
  b.release_held();
  while (b.size() < 50) b.noise_burst();

  LabeledTrace out;
  out.events = b.take();
  out.label = label;
  out.seed = seed;
  out.skeleton_indices = std::move(skeleton_indices);
  return out;
}

}  // namespace bdl
