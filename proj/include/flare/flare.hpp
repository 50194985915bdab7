#pragma once

#include "flare/aes.hpp"
#include "flare/attacker.hpp"
#include "flare/bitstream.hpp"
#include "flare/campaign.hpp"
#include "flare/fabric.hpp"
#include "flare/io.hpp"
#include "flare/reconfig_manager.hpp"
#include "flare/scenario.hpp"
#include "flare/trial_log.hpp"
#include "flare/victims.hpp"
