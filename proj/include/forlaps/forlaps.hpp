#pragma once

// Umbrella header for the library (the HTTP service and CLI are separate).
#include "forlaps/augment.hpp"
#include "forlaps/config.hpp"
#include "forlaps/distance.hpp"
#include "forlaps/evaluate.hpp"
#include "forlaps/eventlog.hpp"
#include "forlaps/finetune.hpp"
#include "forlaps/mdp.hpp"
#include "forlaps/policy.hpp"
#include "forlaps/qlearn.hpp"
#include "forlaps/snapshot.hpp"
