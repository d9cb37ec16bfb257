import { defineConfig } from "vite";

// Dev server proxies API calls to a locally running election service so the
// pages can use same-origin paths in both dev and production.
const API = "http://127.0.0.1:8731";

export default defineConfig({
  server: {
    port: 5173,
    proxy: {
      "/register": API,
      "/otp": API,
      "/keys": API,
      "/liveness": API,
      "/vote": API,
      "/public": API,
      "/admin": API,
      "/healthz": API,
    },
  },
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
  },
});
