import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    testTimeout: 120000,
    hookTimeout: 120000,
    // the integration suite drives one live backend; run files serially
    fileParallelism: false,
  },
});
