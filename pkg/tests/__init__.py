# Tests for sketchcluster
