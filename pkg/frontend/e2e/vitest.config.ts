import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    include: ["e2e/flow.e2e.ts"],
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
