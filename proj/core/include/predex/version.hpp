#pragma once

#define PREDEX_VERSION_MAJOR 0
#define PREDEX_VERSION_MINOR 1
#define PREDEX_VERSION_PATCH 0
#define PREDEX_VERSION "0.1.0"
