// Questionnaire flow: hidden until the session completes, submits one
// Likert rating, then shows the completion screen; a server conflict is
// surfaced verbatim.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { StudyController } from "../src/app.js";
import { StudyView } from "../src/view.js";
import { FakeApi, completedState, flush, makeState } from "./fixtures.js";

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.appendChild(root);
});

const handlers = {
  onMove: () => {},
  onPlayAnyway: () => {},
  onChooseAgain: () => {},
  onQuestionnaire: () => {},
};

describe("visibility", () => {
  it("is hidden while games remain", () => {
    const view = new StudyView(root, handlers);
    view.render(makeState("None"));
    expect(root.querySelector(".questionnaire")).toBeNull();
  });

  it("appears once the ninth game is done", () => {
    const view = new StudyView(root, handlers);
    view.render(completedState(false));
    const widget = root.querySelector(".questionnaire");
    expect(widget).not.toBeNull();
    expect(widget!.querySelectorAll("[data-likert]")).toHaveLength(5);
  });
});

describe("submission", () => {
  it("posts the selected rating and shows the completion screen", async () => {
    const api = new FakeApi(completedState(false));
    const controller = new StudyController(api, root);
    await controller.start("tester", "None", 1);
    await flush();
    root.querySelector<HTMLElement>('[data-likert="4"]')!.click();
    await flush();
    const calls = api.calls.filter((c) => c.method === "submitQuestionnaire");
    expect(calls).toHaveLength(1);
    expect(calls[0].args).toEqual(["sess-1", 4]);
    expect(root.querySelector(".questionnaire")).toBeNull();
    expect(root.querySelector(".completion")).not.toBeNull();
  });

  it("surfaces a server conflict and reconciles state", async () => {
    const api = new FakeApi(completedState(false));
    api.questionnaireError = new ApiError(
      409, "questionnaire_conflict", "questionnaire already submitted");
    const controller = new StudyController(api, root);
    await controller.start("tester", "None", 1);
    await flush();
    api.state = completedState(true); // server already has an answer
    root.querySelector<HTMLElement>('[data-likert="2"]')!.click();
    await flush();
    expect(root.querySelector(".notice")!.textContent).toBe(
      "questionnaire already submitted");
    expect(root.querySelector(".completion")).not.toBeNull();
  });
});
